#pragma once

// Numerical certification of the penalized dynamics: tube bound on phi,
// trajectory Lipschitz constant, truncated Hausdorff moduli, alpha-far
// constants and lambda convergence.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "degsweep/common.hpp"
#include "degsweep/dynamics.hpp"
#include "degsweep/set_zoo.hpp"

namespace degsweep::analysis {

using dynamics::Scenario;
using dynamics::Trajectory;

struct FarParameters {
    double alpha = 1.0;
    double rho = kInf;
};

/// m alpha^2 - L.
[[nodiscard]] double stability_margin(const Scenario& sc, const FarParameters& params);

// ── Tube bound and Lipschitz constant ────────────────────────────────────────

struct PhiBoundCheck {
    bool satisfied = true;
    double worst_ratio = 0.0;
    double phi_max = 0.0;
    double phi_bound = 0.0;
};

inline constexpr double kDefaultTolDisc = 0.02;
inline constexpr double kLipschitzSlack = 0.05;

/// worst_ratio = max_i phi_i / (kappa lambda / (m alpha^2 - L)); satisfied
/// iff worst_ratio <= 1 + tol_disc. A zero bound (static set) gives ratio 0
/// when phi vanishes and +inf otherwise.
[[nodiscard]] PhiBoundCheck check_phi_bound(const Trajectory& traj, const Scenario& sc, double kappa,
                                            const FarParameters& params,
                                            double tol_disc = kDefaultTolDisc);

/// max_i |x_{i+1} - x_i| / (t_{i+1} - t_i).
[[nodiscard]] double lipschitz_estimate(const Trajectory& traj);

/// kappa / (m alpha^2 - L).
[[nodiscard]] double lipschitz_bound(const Scenario& sc, double kappa, const FarParameters& params);

// ── Sampling-based set estimators ────────────────────────────────────────────

enum class SamplerKind { grid, monte_carlo };

struct Sampler {
    SamplerKind kind = SamplerKind::grid;
    std::size_t count = 4096;
    std::uint64_t seed = 0;
};

[[nodiscard]] const char* to_string(SamplerKind kind);

/// Points of the closed r-ball in R^n. `grid` is a symmetric odd lattice
/// (contains the axes) plus the lattice shell pushed onto the sphere;
/// `monte_carlo` is uniform in the ball. Deterministic in (n, r, sampler).
[[nodiscard]] std::vector<Vec> ball_samples(Eigen::Index n, double r, const Sampler& sampler);

/// Lower estimate of sup_{|z| <= r} |d(z,A) - d(z,B)|.
[[nodiscard]] double truncated_hausdorff(const sets::SetInstance& a, const sets::SetInstance& b, double r,
                                         const Sampler& sampler);
[[nodiscard]] double truncated_hausdorff(const sets::SetInstance& a, const sets::SetInstance& b,
                                         std::span<const Vec> samples);

struct KappaQuery {
    std::vector<std::pair<double, double>> t_pairs;
    std::vector<std::pair<Vec, Vec>> x_pairs;
    /// State held fixed for t-pairs (zero vector when empty).
    Vec x_ref;
    /// Time held fixed for x-pairs.
    double t_ref = 0.0;
};

struct KappaEstimate {
    double kappa_r = 0.0;
    double lipschitz_state = 0.0;
    std::size_t t_pairs_used = 0;
    std::size_t x_pairs_used = 0;
};

/// Sample-based lower bounds of kappa_r (time modulus) and L (state
/// modulus) of the truncated Hausdorff distance. Degenerate pairs are
/// skipped.
[[nodiscard]] KappaEstimate estimate_kappa(const sets::MovingSetSpec& spec, double r, const KappaQuery& query,
                                           const Sampler& sampler);

inline constexpr double kDefaultHullBand = 1e-2;

/// Minimum distance from the origin to the convex hull of `points`.
[[nodiscard]] double min_norm_in_hull(std::span<const Vec> points);

/// Estimate of inf_{y in U_rho} d(0, co{(y - p)/|y - p|}) where p ranges over
/// the pieces whose distance lies within hull_band * d(y) of d(y); the band
/// stands in for the limiting gradients that generate the Clarke
/// subdifferential near kinks. Throws TubeSamplingFailed.
[[nodiscard]] double estimate_alpha(const sets::SetInstance& inst, double rho, std::size_t sample_count,
                                    std::uint64_t seed, double hull_band = kDefaultHullBand);

// ── Trajectory comparison ────────────────────────────────────────────────────

/// Linear interpolation of the trajectory state at time t.
[[nodiscard]] Vec state_at(const Trajectory& traj, double t);

/// max over a uniform grid of |x_A(t) - x_B(t)|. Throws GridMismatch if the
/// horizons differ.
[[nodiscard]] double sup_diff(const Trajectory& a, const Trajectory& b, std::size_t grid_points = 1000);

// ── Scenario-level diagnostics ───────────────────────────────────────────────

/// kappa-tilde = kappa_{|A(x0)| + M R} with R = 2 T kappa_guess / (m alpha^2 - L),
/// kappa_guess measured at r0 = max(|A(x0)|, 1).
struct KappaResolution {
    double r_first = 0.0;
    double kappa_first = 0.0;
    double travel_radius = 0.0;
    double r_final = 0.0;
    double kappa = 0.0;
    double lipschitz_state = 0.0;
};

[[nodiscard]] KappaResolution resolve_kappa(const Scenario& sc, const Sampler& sampler);

/// Checks the standing hypotheses and throws ValidationError naming the
/// first one violated: "H_A1", "H_A2", "H1", "H2", "feasibility",
/// "penalty-gate". Returns the resolved kappa on success.
KappaResolution validate_scenario(const Scenario& sc, const Sampler& sampler = {});

/// Largest admissible lambda, (m alpha^2 - L) rho / kappa (inf if rho or
/// the ratio is unbounded).
[[nodiscard]] double penalty_gate(const Scenario& sc, double kappa);

struct LambdaDiagnostics {
    double lambda = 0.0;
    bool ok = false;
    std::string error;
    PhiBoundCheck phi;
    double lipschitz = 0.0;
    bool lipschitz_ok = false;
    std::size_t steps = 0;
};

struct ConvergenceEntry {
    double lambda = 0.0;
    double next_lambda = 0.0;
    double sup_diff = 0.0;
};

struct DiagnosticsReport {
    double phi_max = 0.0;
    double phi_bound = 0.0;
    bool bound_satisfied = true;
    double lipschitz_estimate = 0.0;
    double lipschitz_bound = 0.0;
    bool lipschitz_satisfied = true;
    KappaResolution kappa;
    std::map<double, double> kappa_estimates;
    double alpha_estimate = 1.0;
    std::vector<ConvergenceEntry> convergence_table;
    bool convergence_monotone = true;
    std::vector<LambdaDiagnostics> per_lambda;

    [[nodiscard]] bool all_passed() const;
};

struct SweepOptions {
    unsigned jobs = 1;
    Sampler sampler;
    std::size_t grid_points = 1000;
    std::size_t alpha_samples = 4096;
    double tol_disc = kDefaultTolDisc;
};

struct SweepResult {
    DiagnosticsReport report;
    /// Same order as scenario.lambdas; empty when that lambda failed.
    std::vector<std::optional<Trajectory>> trajectories;
};

/// Integrates every lambda (in parallel when jobs > 1), checks the tube and
/// Lipschitz bounds per lambda and tabulates sup_diff between consecutive
/// lambdas. A failed lambda is recorded in its LambdaDiagnostics.
[[nodiscard]] SweepResult lambda_sweep(const Scenario& sc, const SweepOptions& opts = {});

/// Single-trajectory diagnostics with the scenario's kappa resolution.
[[nodiscard]] LambdaDiagnostics diagnose(const Trajectory& traj, const Scenario& sc, const KappaResolution& kappa,
                                         double tol_disc = kDefaultTolDisc);

}  // namespace degsweep::analysis
