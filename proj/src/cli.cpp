#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "degsweep/cli.hpp"

namespace degsweep::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBound = 2;

struct CommonFlags {
    std::string scenario;
    std::string out;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json to_json(const analysis::PhiBoundCheck& c) {
    return {{"phi_max", c.phi_max},
            {"phi_bound", c.phi_bound},
            {"worst_ratio", c.worst_ratio},
            {"bound_satisfied", c.satisfied}};
}

json to_json(const analysis::LambdaDiagnostics& d) {
    json j = {{"lambda", d.lambda}, {"ok", d.ok}};
    if (!d.error.empty()) {
        j["error"] = d.error;
        return j;
    }
    j["phi"] = to_json(d.phi);
    j["lipschitz_estimate"] = d.lipschitz;
    j["lipschitz_ok"] = d.lipschitz_ok;
    j["steps"] = d.steps;
    return j;
}

json to_json(const analysis::KappaResolution& k) {
    return {{"r_first", k.r_first},
            {"kappa_first", k.kappa_first},
            {"travel_radius", k.travel_radius},
            {"r_final", k.r_final},
            {"kappa_tilde", k.kappa},
            {"L_hat", k.lipschitz_state}};
}

json kappa_table(const std::map<double, double>& estimates) {
    json arr = json::array();
    for (const auto& [r, kappa] : estimates) arr.push_back({{"r", r}, {"kappa", kappa}});
    return arr;
}

json to_json(const analysis::DiagnosticsReport& r) {
    json conv = json::array();
    for (const auto& e : r.convergence_table) {
        conv.push_back({{"lambda", e.lambda}, {"next_lambda", e.next_lambda}, {"sup_diff", e.sup_diff}});
    }
    json per = json::array();
    for (const auto& d : r.per_lambda) per.push_back(to_json(d));
    return {{"phi_max", r.phi_max},
            {"phi_bound", r.phi_bound},
            {"bound_satisfied", r.bound_satisfied},
            {"lipschitz_estimate", r.lipschitz_estimate},
            {"lipschitz_bound", r.lipschitz_bound},
            {"lipschitz_satisfied", r.lipschitz_satisfied},
            {"kappa", to_json(r.kappa)},
            {"kappa_estimates", kappa_table(r.kappa_estimates)},
            {"alpha_estimate", r.alpha_estimate},
            {"convergence_table", conv},
            {"convergence_monotone", r.convergence_monotone},
            {"per_lambda", per}};
}

std::string status_of(const analysis::LambdaDiagnostics& d) {
    if (!d.error.empty()) return "error";
    return d.ok ? "ok" : "bound_failed";
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
    if (!f) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void write_csv(const fs::path& path, const dynamics::Trajectory& traj) {
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    write_file(path, os.str());
}

fs::path output_dir(const CommonFlags& flags, const ScenarioDocument& doc) {
    fs::path dir = flags.out.empty() ? fs::path(doc.output.dir) : fs::path(flags.out);
    fs::create_directories(dir);
    return dir;
}

analysis::Sampler sampler_for(const CommonFlags& flags) {
    analysis::Sampler s;
    s.seed = flags.seed;
    return s;
}

json summary_header(const std::string& command, const ScenarioDocument& doc, const CommonFlags& flags) {
    return {{"command", command},
            {"scenario_hash", hex(doc.hash)},
            {"seed", flags.seed},
            {"operator_constants_adjusted", doc.scenario.op.constants_adjusted()}};
}

void write_timing(const fs::path& dir, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    write_json(dir / "timing.json", {{"wall_seconds", elapsed.count()}});
}

int cmd_solve(const CommonFlags& flags, std::optional<double> lambda, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const auto sampler = sampler_for(flags);
    ScenarioDocument doc = load_scenario(flags.scenario, false, sampler);
    if (lambda) doc.scenario.lambdas = {*lambda};
    const auto kappa = analysis::validate_scenario(doc.scenario, sampler);
    const double lam = doc.scenario.lambdas.back();

    const auto traj = dynamics::integrate(doc.scenario, lam);
    const auto diag = analysis::diagnose(traj, doc.scenario, kappa);

    const fs::path dir = output_dir(flags, doc);
    write_csv(dir / "trajectory.csv", traj);
    json summary = summary_header("solve", doc, flags);
    summary["lambda"] = lam;
    summary["status"] = status_of(diag);
    summary["kappa"] = to_json(kappa);
    summary["diagnostics"] = to_json(diag);
    summary["lipschitz_bound"] = analysis::lipschitz_bound(doc.scenario, kappa.kappa,
                                                           {doc.scenario.alpha_assumed, doc.scenario.rho_assumed});
    write_json(dir / "summary.json", summary);
    write_timing(dir, start);

    out << "solve lambda=" << lam << " steps=" << diag.steps << " phi_max=" << diag.phi.phi_max
        << " ratio=" << diag.phi.worst_ratio << " lipschitz=" << diag.lipschitz << " -> " << status_of(diag) << "\n";
    return diag.ok ? kExitOk : kExitBound;
}

int cmd_sweep(const CommonFlags& flags, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const auto sampler = sampler_for(flags);
    const ScenarioDocument doc = load_scenario(flags.scenario, true, sampler);

    analysis::SweepOptions opts;
    opts.jobs = flags.jobs;
    opts.sampler = sampler;
    opts.grid_points = doc.output.grid_points;
    const auto result = analysis::lambda_sweep(doc.scenario, opts);
    const auto& report = result.report;

    const fs::path dir = output_dir(flags, doc);
    json lambdas = json::array();
    for (std::size_t j = 0; j < result.trajectories.size(); ++j) {
        const auto& d = report.per_lambda[j];
        json entry = {{"lambda", d.lambda}, {"status", status_of(d)}};
        if (result.trajectories[j]) {
            const std::string name = "trajectory_" + std::to_string(j) + ".csv";
            write_csv(dir / name, *result.trajectories[j]);
            entry["csv"] = name;
        }
        if (!d.error.empty()) entry["error"] = d.error;
        lambdas.push_back(entry);
    }
    write_json(dir / "report.json", to_json(report));
    json summary = summary_header("sweep", doc, flags);
    summary["lambdas"] = lambdas;
    summary["report"] = to_json(report);
    write_json(dir / "summary.json", summary);
    write_timing(dir, start);

    bool any_error = false;
    for (const auto& d : report.per_lambda) any_error = any_error || !d.error.empty();
    out << "sweep: " << report.per_lambda.size() << " lambdas, kappa~=" << report.kappa.kappa
        << ", bound " << (report.bound_satisfied ? "ok" : "FAILED") << ", lipschitz "
        << (report.lipschitz_satisfied ? "ok" : "FAILED") << "\n";
    for (const auto& e : report.convergence_table) {
        out << "  sup_diff(" << e.lambda << ", " << e.next_lambda << ") = " << e.sup_diff << "\n";
    }
    if (any_error) return kExitError;
    return report.all_passed() ? kExitOk : kExitBound;
}

int cmd_diagnose(const CommonFlags& flags, const std::string& csv_path, std::optional<double> lambda,
                 std::ostream& out) {
    const auto sampler = sampler_for(flags);
    ScenarioDocument doc = load_scenario(flags.scenario, false, sampler);
    const double lam = lambda ? *lambda : doc.scenario.lambdas.empty() ? 0.0 : doc.scenario.lambdas.back();
    doc.scenario.lambdas = {lam};
    const auto kappa = analysis::validate_scenario(doc.scenario, sampler);

    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw Error("cannot open trajectory " + csv_path);
    auto traj = read_trajectory_csv(in, lam);
    if (traj.states.front().size() != doc.scenario.dimension()) {
        throw DimensionMismatch("trajectory dimension does not match the scenario");
    }
    // phi is recomputed from the states; the file column is only compared.
    double column_mismatch = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double phi = dynamics::phi_at(doc.scenario, traj.times[i], traj.states[i]);
        column_mismatch = std::max(column_mismatch, std::abs(phi - traj.phi[i]));
        traj.phi[i] = phi;
        traj.images[i] = doc.scenario.op.apply(traj.states[i]);
    }
    const auto diag = analysis::diagnose(traj, doc.scenario, kappa);

    json j = summary_header("diagnose", doc, flags);
    j["lambda"] = lam;
    j["status"] = status_of(diag);
    j["kappa"] = to_json(kappa);
    j["diagnostics"] = to_json(diag);
    j["phi_column_mismatch"] = column_mismatch;
    j["lipschitz_bound"] =
        analysis::lipschitz_bound(doc.scenario, kappa.kappa, {doc.scenario.alpha_assumed, doc.scenario.rho_assumed});
    if (flags.out.empty()) {
        out << j.dump(2) << "\n";
    } else {
        fs::create_directories(flags.out);
        write_json(fs::path(flags.out) / "diagnose.json", j);
        out << "diagnose lambda=" << lam << " phi_max=" << diag.phi.phi_max << " -> " << status_of(diag) << "\n";
    }
    return diag.ok ? kExitOk : kExitBound;
}

int cmd_estimate_set(const CommonFlags& flags, double time, std::size_t samples, std::ostream& out) {
    const auto sampler = sampler_for(flags);
    const ScenarioDocument doc = load_scenario(flags.scenario, false, sampler);
    const auto& sc = doc.scenario;

    const auto inst = sets::instantiate(sc.set, time, sc.x0);
    const double alpha = analysis::estimate_alpha(inst, sc.rho_assumed, samples, flags.seed);

    json j = summary_header("estimate-set", doc, flags);
    j["time"] = time;
    j["rho"] = sc.rho_assumed;
    j["alpha_samples"] = samples;
    j["alpha_estimate"] = alpha;
    j["alpha_assumed"] = sc.alpha_assumed;
    j["convex"] = inst.is_convex();
    j["max_projections"] = inst.max_projections();

    const auto kappa = analysis::resolve_kappa(sc, sampler);
    j["kappa"] = to_json(kappa);
    j["kappa_estimates"] = kappa_table({{kappa.r_first, kappa.kappa_first}, {kappa.r_final, kappa.kappa}});
    const auto start_inst = sets::instantiate(sc.set, 0.0, sc.x0);
    const auto end_inst = sets::instantiate(sc.set, sc.horizon, sc.x0);
    j["truncated_hausdorff"] = {{"r", kappa.r_final},
                                {"t0", 0.0},
                                {"t1", sc.horizon},
                                {"value", analysis::truncated_hausdorff(start_inst, end_inst, kappa.r_final, sampler)},
                                {"sampler", analysis::to_string(sampler.kind)},
                                {"count", sampler.count}};

    const bool ok = alpha + 0.01 >= sc.alpha_assumed;
    j["alpha_consistent"] = ok;
    if (flags.out.empty()) {
        out << j.dump(2) << "\n";
    } else {
        fs::create_directories(flags.out);
        write_json(fs::path(flags.out) / "estimate_set.json", j);
        out << "estimate-set alpha_estimate=" << alpha << " kappa~=" << kappa.kappa << "\n";
    }
    return ok ? kExitOk : kExitBound;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moreau-Yosida solver and bound checker for degenerate state-dependent sweeping processes",
                 "degsweep"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::optional<double> lambda;
    std::string trajectory;
    double time = 0.0;
    std::size_t samples = 10000;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", flags.scenario, "Scenario JSON document")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "Output directory (default: output.dir of the scenario)");
        sub->add_option("--seed", flags.seed, "Seed for sampling estimators");
        sub->add_option("--jobs", flags.jobs, "Worker threads across lambda values")->check(CLI::PositiveNumber);
    };

    auto* solve = app.add_subcommand("solve", "Integrate one lambda and check the tube and Lipschitz bounds");
    add_common(solve);
    solve->add_option("--lambda", lambda, "Penalty parameter (default: smallest lambda of the scenario)");

    auto* sweep = app.add_subcommand("sweep", "Integrate every lambda and tabulate convergence");
    add_common(sweep);

    auto* diag = app.add_subcommand("diagnose", "Check bounds on an existing trajectory CSV");
    add_common(diag);
    diag->add_option("--trajectory", trajectory, "Trajectory CSV written by solve/sweep")
        ->required()
        ->check(CLI::ExistingFile);
    diag->add_option("--lambda", lambda, "Penalty parameter of the trajectory");

    auto* estimate = app.add_subcommand("estimate-set", "Estimate alpha, kappa and truncated Hausdorff for a set");
    add_common(estimate);
    estimate->add_option("--time", time, "Time at which the set is frozen for the alpha estimate");
    estimate->add_option("--samples", samples, "Tube samples for the alpha estimate")->check(CLI::PositiveNumber);

    std::vector<const char*> argv;
    argv.push_back("degsweep");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (solve->parsed()) return cmd_solve(flags, lambda, out);
        if (sweep->parsed()) return cmd_sweep(flags, out);
        if (diag->parsed()) return cmd_diagnose(flags, trajectory, lambda, out);
        if (estimate->parsed()) return cmd_estimate_set(flags, time, samples, out);
    } catch (const ValidationError& e) {
        err << "ValidationError(" << e.hypothesis() << "): " << e.what() << "\n";
        return kExitError;
    } catch (const ParseError& e) {
        err << "ParseError: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace degsweep::cli
