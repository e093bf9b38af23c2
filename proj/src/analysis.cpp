#include "degsweep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace degsweep::analysis {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

double stability_margin(const Scenario& sc, const FarParameters& params) {
    return sc.op.m() * params.alpha * params.alpha - sc.set.state_lipschitz();
}

PhiBoundCheck check_phi_bound(const Trajectory& traj, const Scenario& sc, double kappa,
                              const FarParameters& params, double tol_disc) {
    PhiBoundCheck out;
    for (double p : traj.phi) out.phi_max = std::max(out.phi_max, p);
    const double margin = stability_margin(sc, params);
    out.phi_bound = margin > 0.0 ? kappa * traj.lambda / margin : kInf;
    if (out.phi_bound > 0.0) {
        out.worst_ratio = out.phi_max / out.phi_bound;
    } else {
        out.worst_ratio = out.phi_max <= 1e-12 ? 0.0 : kInf;
    }
    out.satisfied = out.worst_ratio <= 1.0 + tol_disc;
    return out;
}

double lipschitz_estimate(const Trajectory& traj) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        if (dt <= 0.0) continue;
        best = std::max(best, (traj.states[i + 1] - traj.states[i]).norm() / dt);
    }
    return best;
}

double lipschitz_bound(const Scenario& sc, double kappa, const FarParameters& params) {
    const double margin = stability_margin(sc, params);
    return margin > 0.0 ? kappa / margin : kInf;
}

Vec state_at(const Trajectory& traj, double t) {
    if (traj.size() == 0) throw std::invalid_argument("state_at: empty trajectory");
    if (t <= traj.times.front()) return traj.states.front();
    if (t >= traj.times.back()) return traj.states.back();
    const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    const auto hi = static_cast<std::size_t>(it - traj.times.begin());
    const std::size_t lo = hi - 1;
    const double span = traj.times[hi] - traj.times[lo];
    const double w = span > 0.0 ? (t - traj.times[lo]) / span : 0.0;
    return (1.0 - w) * traj.states[lo] + w * traj.states[hi];
}

double sup_diff(const Trajectory& a, const Trajectory& b, std::size_t grid_points) {
    if (a.size() == 0 || b.size() == 0) throw GridMismatch("sup_diff: empty trajectory");
    const double T = a.horizon();
    if (std::abs(T - b.horizon()) > 1e-12 * std::max(1.0, T) || a.times.front() != b.times.front()) {
        throw GridMismatch("sup_diff: horizons differ (" + num(T) + " vs " + num(b.horizon()) + ")");
    }
    if (a.states.front().size() != b.states.front().size()) {
        throw DimensionMismatch("sup_diff: state dimensions differ");
    }
    const std::size_t points = std::max<std::size_t>(grid_points, 2);
    const double t0 = a.times.front();
    double best = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = (i + 1 == points) ? T : t0 + (T - t0) * static_cast<double>(i) / static_cast<double>(points - 1);
        best = std::max(best, (state_at(a, t) - state_at(b, t)).norm());
    }
    return best;
}

// ── Kappa resolution and validation ──────────────────────────────────────────

namespace {

KappaQuery scenario_query(const Scenario& sc) {
    KappaQuery q;
    const int intervals = 32;
    for (int k = 0; k < intervals; ++k) {
        q.t_pairs.emplace_back(sc.horizon * k / intervals, sc.horizon * (k + 1) / intervals);
    }
    q.x_ref = sc.x0;
    q.t_ref = 0.0;
    if (!sc.set.state_independent()) {
        const Eigen::Index n = sc.dimension();
        const double step = 0.1 * std::max(1.0, sc.x0.norm());
        for (Eigen::Index i = 0; i < n; ++i) {
            q.x_pairs.emplace_back(sc.x0, sc.x0 + step * Vec::Unit(n, i));
        }
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int k = 0; k < 16 && n > 1; ++k) {
            Vec d(n);
            for (Eigen::Index i = 0; i < n; ++i) d[i] = gauss(rng);
            q.x_pairs.emplace_back(sc.x0, sc.x0 + step * d.normalized());
        }
    }
    return q;
}

}  // namespace

KappaResolution resolve_kappa(const Scenario& sc, const Sampler& sampler) {
    const FarParameters params{sc.alpha_assumed, sc.rho_assumed};
    const double margin = stability_margin(sc, params);
    if (!(margin > 0.0)) {
        throw ValidationError("H2", "m*alpha^2 - L must be positive (got " + num(margin) + ")");
    }
    const KappaQuery query = scenario_query(sc);
    const double z0_norm = sc.op.apply(sc.x0).norm();

    KappaResolution out;
    out.r_first = std::max(z0_norm, 1.0);
    const KappaEstimate first = estimate_kappa(sc.set, out.r_first, query, sampler);
    out.kappa_first = first.kappa_r;
    out.travel_radius = 2.0 * sc.horizon * first.kappa_r / margin;
    out.r_final = std::max(z0_norm + sc.op.M() * out.travel_radius, out.r_first);
    if (out.r_final == out.r_first) {
        out.kappa = first.kappa_r;
        out.lipschitz_state = first.lipschitz_state;
    } else {
        const KappaEstimate final_est = estimate_kappa(sc.set, out.r_final, query, sampler);
        out.kappa = std::max(final_est.kappa_r, first.kappa_r);
        out.lipschitz_state = std::max(final_est.lipschitz_state, first.lipschitz_state);
    }
    return out;
}

double penalty_gate(const Scenario& sc, double kappa) {
    const double margin = stability_margin(sc, {sc.alpha_assumed, sc.rho_assumed});
    if (!std::isfinite(sc.rho_assumed) || !(kappa > 0.0)) return kInf;
    return margin * sc.rho_assumed / kappa;
}

KappaResolution validate_scenario(const Scenario& sc, const Sampler& sampler) {
    const Eigen::Index n = sc.dimension();
    if (n == 0 || sc.set.dimension() != n || sc.op.dimension() != n) {
        throw ValidationError("problem", "dimension of x0, operator and set must agree");
    }
    if (!sc.x0.allFinite()) throw ValidationError("problem", "x0 has non-finite entries");
    if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon)) {
        throw ValidationError("problem", "horizon must be positive");
    }
    if (sc.lambdas.empty()) throw ValidationError("problem", "at least one lambda is required");
    for (std::size_t j = 0; j < sc.lambdas.size(); ++j) {
        if (!(sc.lambdas[j] > 0.0) || !std::isfinite(sc.lambdas[j])) {
            throw ValidationError("problem", "lambdas must be positive");
        }
        if (j > 0 && !(sc.lambdas[j] < sc.lambdas[j - 1])) {
            throw ValidationError("problem", "lambdas must be strictly descending");
        }
    }
    const auto& cfg = sc.integrator;
    if (!(cfg.safety > 0.0 && cfg.safety <= 1.0)) throw ValidationError("problem", "integrator safety must lie in (0, 1]");
    if (!(cfg.h_max > 0.0)) throw ValidationError("problem", "integrator h_max must be positive");
    if (!(cfg.tol_adapt > 0.0)) throw ValidationError("problem", "integrator tol_adapt must be positive");

    const double m = sc.op.m();
    const double M = sc.op.M();
    if (!(m > 0.0)) throw ValidationError("H_A1", "strong monotonicity constant m must be positive");
    if (!(M >= m)) throw ValidationError("H_A2", "Lipschitz constant M must satisfy M >= m");
    const auto consts = ops::verify_constants(sc.op, 256, std::max(1.0, sc.x0.norm()), 0);
    if (consts.m_hat < m * (1.0 - 1e-9)) {
        throw ValidationError("H_A1", "sampled monotonicity " + num(consts.m_hat) + " below m = " + num(m));
    }
    if (consts.M_hat > M * (1.0 + 1e-9)) {
        throw ValidationError("H_A2", "sampled Lipschitz ratio " + num(consts.M_hat) + " above M = " + num(M));
    }

    const double L = sc.set.state_lipschitz();
    if (!(L < m)) {
        throw ValidationError("H1", "L < m required (L = " + num(L) + ", m = " + num(m) + ")");
    }
    const double alpha = sc.alpha_assumed;
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("H2", "alpha must lie in (0, 1]");
    if (!(sc.rho_assumed > 0.0)) throw ValidationError("H2", "rho must be positive");
    if (!(m * alpha * alpha - L > 0.0)) {
        throw ValidationError("H2", "alpha^2 > L/m required (alpha = " + num(alpha) + ", L/m = " + num(L / m) + ")");
    }

    const double phi0 = dynamics::phi_at(sc, 0.0, sc.x0);
    if (phi0 > 1e-9) {
        throw ValidationError("feasibility", "A(x0) is not in C(0, x0): distance " + num(phi0));
    }

    const KappaResolution kappa = resolve_kappa(sc, sampler);
    if (kappa.lipschitz_state > L * (1.0 + 1e-6) + 1e-9) {
        throw ValidationError("H1", "declared L_state = " + num(L) + " is below the sampled state modulus " +
                                        num(kappa.lipschitz_state));
    }

    for (double t : {0.0, 0.5 * sc.horizon, sc.horizon}) {
        const auto inst = sets::instantiate(sc.set, t, sc.x0);
        double est = 1.0;
        try {
            est = estimate_alpha(inst, sc.rho_assumed, 2048, 0);
        } catch (const TubeSamplingFailed& e) {
            throw ValidationError("H2", e.what());
        }
        if (est + 0.01 < alpha) {
            throw ValidationError("H2", "assumed alpha = " + num(alpha) + " exceeds sampled estimate " + num(est));
        }
    }

    const double gate = penalty_gate(sc, kappa.kappa);
    for (double lambda : sc.lambdas) {
        if (!(lambda < gate)) {
            throw ValidationError("penalty-gate", "lambda = " + num(lambda) + " must be below (m*alpha^2 - L)*rho/kappa = " +
                                                      num(gate));
        }
    }
    return kappa;
}

}  // namespace degsweep::analysis
