#include "degsweep/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace degsweep::dynamics {

namespace {

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be a positive finite number");
    }
}

void check_horizon(const Scenario& sc) {
    if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon)) {
        throw std::invalid_argument("horizon must be positive");
    }
    require_dim(sc.x0, sc.set.dimension(), "x0 vs set");
    require_dim(sc.x0, sc.op.dimension(), "x0 vs operator");
    require_finite(sc.x0, "x0");
}

struct Recorder {
    const Scenario& sc;
    Trajectory traj;

    void push(double t, const Vec& x) {
        Vec z = sc.op.apply(x);
        const double phi = sets::instantiate(sc.set, t, x).distance(z);
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.images.push_back(std::move(z));
        traj.phi.push_back(phi);
    }
};

class Rhs {
public:
    Rhs(const Scenario& sc, double lambda, StepStats& stats) : sc_(sc), lambda_(lambda), stats_(stats) {}

    Vec operator()(double t, const Vec& x) {
        ++stats_.rhs_evals;
        return penalized_rhs(sc_, lambda_, t, x);
    }

private:
    const Scenario& sc_;
    double lambda_;
    StepStats& stats_;
};

Vec rk4_step(Rhs& f, double t, const Vec& x, double h) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
    const Vec k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
    const Vec k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void note_step(StepStats& s, double h) {
    ++s.accepted;
    s.h_min = std::min(s.h_min, h);
    s.h_max = std::max(s.h_max, h);
}

void integrate_fixed(Recorder& rec, Rhs& f, double cap, Method method) {
    const double T = rec.sc.horizon;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(T / cap * (1.0 - 1e-12))));
    const double h = T / static_cast<double>(steps);
    Vec x = rec.sc.x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        if (method == Method::euler) {
            x += h * f(t, x);
        } else {
            x = rk4_step(f, t, x, h);
        }
        const double t_next = (k + 1 == steps) ? T : static_cast<double>(k + 1) * h;
        note_step(rec.traj.stats, h);
        rec.push(t_next, x);
    }
}

void integrate_adaptive(Recorder& rec, Rhs& f, double cap) {
    const IntegratorConfig& cfg = rec.sc.integrator;
    const double T = rec.sc.horizon;
    const double h_floor = 1e-12 * T;
    double t = 0.0;
    double h = cap;
    Vec x = rec.sc.x0;
    while (t < T) {
        const bool last = t + h >= T * (1.0 - 1e-14);
        const double step = last ? T - t : h;
        const Vec full = rk4_step(f, t, x, step);
        const Vec half = rk4_step(f, t, x, 0.5 * step);
        const Vec two_halves = rk4_step(f, t + 0.5 * step, half, 0.5 * step);
        const double err = (two_halves - full).norm() / 15.0;
        const double tol = cfg.tol_adapt * (1.0 + x.norm());
        if (err <= tol) {
            x = two_halves;
            t = last ? T : t + step;
            note_step(rec.traj.stats, step);
            rec.push(t, x);
        } else {
            ++rec.traj.stats.rejected;
        }
        const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
        h = std::min(cap, step * std::clamp(grow, 0.2, 2.0));
        if (h < h_floor && t < T) {
            throw StepFailure("adaptive step underflow at t = " + std::to_string(t));
        }
    }
}

}  // namespace

double phi_at(const Scenario& sc, double t, const Vec& x) {
    return sets::instantiate(sc.set, t, x).distance(sc.op.apply(x));
}

Vec penalized_rhs(const Scenario& sc, double lambda, double t, const Vec& x) {
    check_lambda(lambda);
    const Vec z = sc.op.apply(x);
    const sets::SetInstance inst = sets::instantiate(sc.set, t, x);
    const auto candidates = inst.project(z);
    const Vec p = sets::select_projection(candidates);
    Vec v = (p - z) / lambda;
    // Inside the set the projection returns z itself; keep the zero exact.
    if (p == z) v.setZero();
    return v;
}

double step_cap(const Scenario& sc, double lambda) {
    check_lambda(lambda);
    const IntegratorConfig& cfg = sc.integrator;
    if (!(cfg.safety > 0.0 && cfg.safety <= 1.0)) {
        throw std::invalid_argument("integrator safety must lie in (0, 1]");
    }
    double cap = cfg.safety * lambda / (1.0 + sc.op.M());
    if (cfg.h_max > 0.0) cap = std::min(cap, cfg.h_max);
    if (cfg.h_over_lambda > 0.0) cap = std::min(cap, cfg.h_over_lambda * lambda);
    return std::min(cap, sc.horizon);
}

Trajectory integrate(const Scenario& sc, double lambda) {
    check_lambda(lambda);
    check_horizon(sc);
    Recorder rec{sc, {}};
    rec.traj.lambda = lambda;
    rec.push(0.0, sc.x0);
    Rhs f(sc, lambda, rec.traj.stats);
    const double cap = step_cap(sc, lambda);
    if (sc.integrator.method == Method::adaptive) {
        integrate_adaptive(rec, f, cap);
    } else {
        integrate_fixed(rec, f, cap, sc.integrator.method);
    }
    return std::move(rec.traj);
}

Trajectory catching_up(const Scenario& sc, double h) {
    check_horizon(sc);
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("catching_up: h must be positive");
    const auto gamma = sc.op.scalar_multiple();
    if (!gamma) throw UnsupportedScenario("catching-up requires A = gamma * I");
    if (!sc.set.state_independent()) throw UnsupportedScenario("catching-up requires a state-independent set");
    if (!sc.set.is_convex()) throw UnsupportedScenario("catching-up requires a convex set");

    const double T = sc.horizon;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(T / h * (1.0 - 1e-12))));
    const double step = T / static_cast<double>(steps);

    Recorder rec{sc, {}};
    Vec z = *gamma * sc.x0;
    rec.push(0.0, sc.x0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = (k == steps) ? T : static_cast<double>(k) * step;
        const Vec x = z / *gamma;
        z = sets::select_projection(sets::instantiate(sc.set, t, x).project(z));
        note_step(rec.traj.stats, step);
        rec.push(t, z / *gamma);
    }
    return std::move(rec.traj);
}

}  // namespace degsweep::dynamics
