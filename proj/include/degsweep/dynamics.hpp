#pragma once

// Moreau-Yosida penalized dynamics
//   x'(t) = (p(t) - A(x(t))) / lambda,  p(t) in Proj_{C(t,x(t))}(A(x(t))),
// explicit time stepping, and the catching-up oracle.

#include <cstddef>
#include <vector>

#include "degsweep/common.hpp"
#include "degsweep/operators.hpp"
#include "degsweep/set_zoo.hpp"

namespace degsweep::dynamics {

enum class Method { euler, rk4, adaptive };

struct IntegratorConfig {
    Method method = Method::rk4;
    /// c in the stiffness guard h <= c * lambda / (1 + M).
    double safety = 0.2;
    double h_max = kInf;
    /// Step-doubling tolerance for Method::adaptive.
    double tol_adapt = 1e-8;
    /// Optional request h = h_over_lambda * lambda; the guard still applies.
    double h_over_lambda = 0.0;
};

struct Scenario {
    double horizon = 1.0;
    Vec x0;
    ops::OperatorSpec op;
    sets::MovingSetSpec set;
    std::vector<double> lambdas;
    IntegratorConfig integrator;
    double alpha_assumed = 1.0;
    double rho_assumed = kInf;

    [[nodiscard]] Eigen::Index dimension() const noexcept { return x0.size(); }
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double h_min = kInf;
    double h_max = 0.0;
};

/// Solution on a grid over [0,T] with z_i = A(x_i) and
/// phi_i = d(z_i, C(t_i, x_i)).
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> images;
    std::vector<double> phi;
    double lambda = 0.0;
    StepStats stats;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }
};

/// (p - A(x)) / lambda with p the lexicographically smallest nearest point;
/// exactly zero when A(x) lies in C(t,x).
[[nodiscard]] Vec penalized_rhs(const Scenario& sc, double lambda, double t, const Vec& x);

/// Step bound min(h_max, c * lambda / (1 + M), h_over_lambda * lambda).
[[nodiscard]] double step_cap(const Scenario& sc, double lambda);

/// Integrates the penalized problem over [0, T]. Fixed-step methods use the
/// largest uniform step not exceeding step_cap(); the adaptive method uses
/// RK4 step doubling. Throws StepFailure when the adaptive step falls below
/// 1e-12 T; projection errors propagate.
[[nodiscard]] Trajectory integrate(const Scenario& sc, double lambda);

/// phi = d(A(x), C(t,x)).
[[nodiscard]] double phi_at(const Scenario& sc, double t, const Vec& x);

/// z_{k+1} = Proj_{C(t_{k+1})}(z_k), z_0 = gamma x0, x_k = z_k / gamma.
/// Only for A = gamma I and convex state-independent sets; anything else
/// throws UnsupportedScenario.
[[nodiscard]] Trajectory catching_up(const Scenario& sc, double h);

}  // namespace degsweep::dynamics
