#include <cmath>
#include <filesystem>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "degsweep/cli.hpp"
#include "support.hpp"

using namespace degsweep;
using namespace degsweep::cli;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "problem": {"dimension": 1, "horizon": 1.0, "x0": [0.0]},
  "operator": {"type": "identity"},
  "set": {"type": "half_space", "zeta": [-1.0], "kappa_t": -1.0},
  "lambdas": [0.1]
})";

json minimal() { return json::parse(kMinimal); }

std::string hypothesis_of(const std::string& text) {
    try {
        (void)parse_scenario(text);
    } catch (const ValidationError& e) {
        return e.hypothesis();
    } catch (const ParseError&) {
        return "parse";
    }
    return "ok";
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("minimal document parses") {
    const auto doc = parse_scenario(kMinimal);
    CHECK(doc.scenario.dimension() == 1);
    CHECK(doc.scenario.horizon == 1.0);
    CHECK(doc.scenario.lambdas == std::vector<double>{0.1});
    CHECK(doc.scenario.rho_assumed == kInf);
    CHECK(doc.output.dir == "out");
    CHECK(doc.output.grid_points == 1000);
    CHECK(doc.hash == fnv1a64(kMinimal));
}

TEST_CASE("hypothesis violations are named") {
    auto sharp = minimal();
    sharp["set"]["L_state"] = 1.5;
    sharp["set"]["u"] = {-1.0};
    CHECK(hypothesis_of(sharp.dump()) == "H1");
    try {
        (void)parse_scenario(sharp.dump());
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).rfind("H1: ", 0) == 0);
    }

    auto infeasible = minimal();
    infeasible["problem"]["x0"] = {-0.5};
    CHECK(hypothesis_of(infeasible.dump()) == "feasibility");

    auto gate = minimal();
    gate["assumed"] = {{"alpha", 1.0}, {"rho", 0.05}};
    CHECK(hypothesis_of(gate.dump()) == "penalty-gate");

    auto op = minimal();
    op["operator"] = {{"type", "linear_spd"}, {"matrix", {{1.0}}}};
    op["problem"]["dimension"] = 1;
    CHECK(hypothesis_of(op.dump()) == "ok");
    op["operator"]["matrix"] = {{-1.0}};
    CHECK(hypothesis_of(op.dump()) == "H_A1");

    auto radius = minimal();
    radius["set"] = {{"type", "ball"}, {"center", {0.0}}, {"radius", -1.0}};
    CHECK(hypothesis_of(radius.dump()) == "set");
}

TEST_CASE("structural errors are parse errors with a location") {
    auto message_of = [](const std::string& text) -> std::string {
        try {
            (void)parse_scenario(text);
        } catch (const ParseError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message_of("{\"problem\": ").find("line") != std::string::npos);

    auto unknown = minimal();
    unknown["set"]["colour"] = "red";
    CHECK(message_of(unknown.dump()).find("/set/colour") != std::string::npos);

    auto top = minimal();
    top["extra"] = 1;
    CHECK(message_of(top.dump()).find("/extra") != std::string::npos);

    auto type = minimal();
    type["problem"]["horizon"] = "long";
    CHECK(message_of(type.dump()).find("/problem/horizon") != std::string::npos);

    auto size = minimal();
    size["problem"]["x0"] = {0.0, 1.0};
    CHECK(message_of(size.dump()).find("/problem/x0") != std::string::npos);

    auto missing = minimal();
    missing.erase("lambdas");
    CHECK(message_of(missing.dump()).find("/lambdas") != std::string::npos);

    auto method = minimal();
    method["integrator"] = {{"method", "leapfrog"}};
    CHECK(message_of(method.dump()).find("/integrator") != std::string::npos);
}

TEST_CASE("every corpus file parses and validates") {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(DEGSWEEP_SCENARIO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW((void)load_scenario(entry.path()));
        ++count;
    }
    CHECK(count >= 6);
}

TEST_CASE("trajectory CSV round-trips bit for bit") {
    const auto doc = load_scenario(testsupport::scenario_path("wedge_translating.json"));
    const auto traj = dynamics::integrate(doc.scenario, 0.05);
    std::stringstream ss;
    write_trajectory_csv(ss, traj);
    const std::string text = ss.str();
    CHECK(text.rfind("t,x_1,x_2,z_1,z_2,phi\n", 0) == 0);
    const auto back = read_trajectory_csv(ss, 0.05);
    REQUIRE(back.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        REQUIRE(back.times[i] == traj.times[i]);
        REQUIRE(back.states[i] == traj.states[i]);
        REQUIRE(back.images[i] == traj.images[i]);
        REQUIRE(back.phi[i] == traj.phi[i]);
    }
}

TEST_CASE("malformed trajectory CSV is rejected") {
    auto reject = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS((void)read_trajectory_csv(in, 0.1), ParseError);
    };
    reject("");
    reject("t,x_1,phi\n0,0,0\n");
    reject("t,x_1,z_1,phi\n0,0,0\n");
    reject("t,x_1,z_1,phi\n0,0,0,0\n0,1,1\n");
    reject("t,x_1,z_1,phi\n0,0,0,0\n0,1,1,0\n");
    reject("t,x_1,z_1,phi\n0,abc,0,0\n");
}

TEST_CASE("sweep on the drifting corpus file") {
    const auto dir = testsupport::fresh_scratch("sweep");
    const auto r = run_cli({"sweep", "--scenario", testsupport::scenario_path("drifting_half_space.json"), "--out",
                            dir.string()});
    CHECK(r.code == 0);
    const auto report = json::parse(testsupport::read_file(dir / "report.json"));
    for (const char* key : {"phi_max", "phi_bound", "bound_satisfied", "lipschitz_estimate", "lipschitz_bound",
                            "convergence_table", "kappa_estimates", "alpha_estimate"}) {
        CHECK(report.contains(key));
    }
    const auto& table = report["convergence_table"];
    REQUIRE(table.size() == 3);
    CHECK(table[1]["sup_diff"].get<double>() < table[0]["sup_diff"].get<double>());
    CHECK(table[2]["sup_diff"].get<double>() < table[1]["sup_diff"].get<double>());
    for (int j = 0; j < 4; ++j) CHECK(fs::exists(dir / ("trajectory_" + std::to_string(j) + ".csv")));
    CHECK(fs::exists(dir / "timing.json"));
    const auto summary = json::parse(testsupport::read_file(dir / "summary.json"));
    CHECK(summary["seed"] == 0);
    CHECK(summary["scenario_hash"].get<std::string>().size() == 16);
    CHECK(summary["lambdas"].size() == 4);
}

TEST_CASE("solve above the penalty gate fails with the hypothesis name") {
    const auto dir = testsupport::fresh_scratch("gate");
    auto doc = minimal();
    doc["assumed"] = {{"alpha", 1.0}, {"rho", 0.5}};
    doc["lambdas"] = {0.1};
    testsupport::write_file(dir / "gate.json", doc.dump());
    const auto r = run_cli({"solve", "--scenario", (dir / "gate.json").string(), "--lambda", "0.6", "--out",
                            (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("penalty-gate") != std::string::npos);
    const auto ok = run_cli({"solve", "--scenario", (dir / "gate.json").string(), "--lambda", "0.3", "--out",
                             (dir / "out").string()});
    CHECK(ok.code == 0);
}

TEST_CASE("estimate-set on the wedge reports alpha near sqrt(2)/2") {
    const auto dir = testsupport::fresh_scratch("estimate");
    const auto r = run_cli({"estimate-set", "--scenario", testsupport::scenario_path("wedge_translating.json"),
                            "--out", dir.string()});
    CHECK(r.code == 0);
    const auto j = json::parse(testsupport::read_file(dir / "estimate_set.json"));
    CHECK(std::abs(j["alpha_estimate"].get<double>() - std::sqrt(0.5)) <= 0.01);
    CHECK(j["truncated_hausdorff"]["sampler"] == "grid");
    CHECK(j.contains("kappa_estimates"));
}

TEST_CASE("solve output is byte-identical across runs and diagnose reproduces it") {
    const auto a = testsupport::fresh_scratch("det_a");
    const auto b = testsupport::fresh_scratch("det_b");
    const auto path = testsupport::scenario_path("state_dependent_half_space.json");
    REQUIRE(run_cli({"solve", "--scenario", path, "--out", a.string(), "--seed", "5"}).code == 0);
    REQUIRE(run_cli({"solve", "--scenario", path, "--out", b.string(), "--seed", "5"}).code == 0);
    CHECK(testsupport::read_file(a / "trajectory.csv") == testsupport::read_file(b / "trajectory.csv"));
    CHECK(testsupport::read_file(a / "summary.json") == testsupport::read_file(b / "summary.json"));

    const auto summary = json::parse(testsupport::read_file(a / "summary.json"));
    CHECK(summary["seed"] == 5);
    const double phi_solve = summary["diagnostics"]["phi"]["phi_max"].get<double>();

    const auto diag_dir = testsupport::fresh_scratch("diag");
    const auto d = run_cli({"diagnose", "--scenario", path, "--trajectory", (a / "trajectory.csv").string(),
                            "--out", diag_dir.string(), "--seed", "5"});
    CHECK(d.code == 0);
    const auto dj = json::parse(testsupport::read_file(diag_dir / "diagnose.json"));
    CHECK(std::abs(dj["diagnostics"]["phi"]["phi_max"].get<double>() - phi_solve) <= 1e-12);
    CHECK(dj["phi_column_mismatch"].get<double>() <= 1e-12);
}

TEST_CASE("sweep outputs agree between one and several jobs") {
    const auto a = testsupport::fresh_scratch("jobs_1");
    const auto b = testsupport::fresh_scratch("jobs_3");
    const auto path = testsupport::scenario_path("wedge_translating.json");
    REQUIRE(run_cli({"sweep", "--scenario", path, "--out", a.string(), "--jobs", "1"}).code == 0);
    REQUIRE(run_cli({"sweep", "--scenario", path, "--out", b.string(), "--jobs", "3"}).code == 0);
    for (const char* name : {"report.json", "summary.json", "trajectory_0.csv", "trajectory_1.csv", "trajectory_2.csv"}) {
        CAPTURE(name);
        CHECK(testsupport::read_file(a / name) == testsupport::read_file(b / name));
    }
}

TEST_CASE("diagnose exits 2 when a trajectory breaks the tube bound") {
    const auto dir = testsupport::fresh_scratch("bad_traj");
    // Standing still while C(t) = { z >= t } moves away: phi(t) = t.
    std::string csv = "t,x_1,z_1,phi\n";
    for (int i = 0; i <= 10; ++i) csv += std::to_string(i / 10.0) + ",0,0," + std::to_string(i / 10.0) + "\n";
    testsupport::write_file(dir / "still.csv", csv);
    const auto r = run_cli({"diagnose", "--scenario", testsupport::scenario_path("drifting_half_space.json"),
                            "--trajectory", (dir / "still.csv").string(), "--lambda", "0.1"});
    CHECK(r.code == 2);
    const auto j = json::parse(r.out);
    CHECK(j["status"] == "bound_failed");
}

TEST_CASE("usage and I/O errors exit 1") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"solve"}).code == 1);
    CHECK(run_cli({"solve", "--scenario", "/nonexistent/file.json"}).code == 1);
    CHECK(run_cli({"sweep", "--scenario", testsupport::scenario_path("drifting_half_space.json"), "--jobs", "0"}).code ==
          1);
    CHECK(run_cli({"--help"}).code == 0);
}
