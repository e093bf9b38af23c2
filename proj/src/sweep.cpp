#include <algorithm>
#include <atomic>
#include <thread>

#include "degsweep/analysis.hpp"

namespace degsweep::analysis {

bool DiagnosticsReport::all_passed() const {
    return bound_satisfied && lipschitz_satisfied &&
           std::all_of(per_lambda.begin(), per_lambda.end(), [](const LambdaDiagnostics& d) { return d.ok; });
}

LambdaDiagnostics diagnose(const Trajectory& traj, const Scenario& sc, const KappaResolution& kappa,
                           double tol_disc) {
    const FarParameters params{sc.alpha_assumed, sc.rho_assumed};
    LambdaDiagnostics out;
    out.lambda = traj.lambda;
    out.steps = traj.size() > 0 ? traj.size() - 1 : 0;
    out.phi = check_phi_bound(traj, sc, kappa.kappa, params, tol_disc);
    out.lipschitz = lipschitz_estimate(traj);
    const double bound = lipschitz_bound(sc, kappa.kappa, params);
    out.lipschitz_ok = out.lipschitz <= (1.0 + kLipschitzSlack) * bound + 1e-12;
    out.ok = out.phi.satisfied && out.lipschitz_ok;
    return out;
}

SweepResult lambda_sweep(const Scenario& sc, const SweepOptions& opts) {
    SweepResult result;
    DiagnosticsReport& report = result.report;
    report.kappa = resolve_kappa(sc, opts.sampler);
    report.kappa_estimates[report.kappa.r_first] = report.kappa.kappa_first;
    report.kappa_estimates[report.kappa.r_final] = report.kappa.kappa;
    report.alpha_estimate =
        estimate_alpha(sets::instantiate(sc.set, 0.0, sc.x0), sc.rho_assumed, opts.alpha_samples, opts.sampler.seed);

    const FarParameters params{sc.alpha_assumed, sc.rho_assumed};
    report.lipschitz_bound = lipschitz_bound(sc, report.kappa.kappa, params);

    const std::size_t count = sc.lambdas.size();
    result.trajectories.resize(count);
    report.per_lambda.resize(count);

    auto work = [&](std::size_t j) {
        LambdaDiagnostics& diag = report.per_lambda[j];
        diag.lambda = sc.lambdas[j];
        try {
            Trajectory traj = dynamics::integrate(sc, sc.lambdas[j]);
            diag = diagnose(traj, sc, report.kappa, opts.tol_disc);
            result.trajectories[j] = std::move(traj);
        } catch (const std::exception& e) {
            diag.ok = false;
            diag.error = e.what();
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(count)));
    if (jobs == 1) {
        for (std::size_t j = 0; j < count; ++j) work(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < count; j = next++) work(j);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Deterministic merge in lambda order.
    double worst = -1.0;
    for (const auto& d : report.per_lambda) {
        if (!d.error.empty()) continue;
        if (d.phi.worst_ratio > worst) {
            worst = d.phi.worst_ratio;
            report.phi_max = d.phi.phi_max;
            report.phi_bound = d.phi.phi_bound;
        }
        report.bound_satisfied = report.bound_satisfied && d.phi.satisfied;
        report.lipschitz_estimate = std::max(report.lipschitz_estimate, d.lipschitz);
        report.lipschitz_satisfied = report.lipschitz_satisfied && d.lipschitz_ok;
    }

    for (std::size_t j = 0; j + 1 < count; ++j) {
        if (!result.trajectories[j] || !result.trajectories[j + 1]) continue;
        const double diff = sup_diff(*result.trajectories[j], *result.trajectories[j + 1], opts.grid_points);
        if (!report.convergence_table.empty() && !(diff < report.convergence_table.back().sup_diff)) {
            report.convergence_monotone = false;
        }
        report.convergence_table.push_back({sc.lambdas[j], sc.lambdas[j + 1], diff});
    }
    return result;
}

}  // namespace degsweep::analysis
