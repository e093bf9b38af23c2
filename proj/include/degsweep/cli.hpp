#pragma once

// Scenario documents, trajectory CSV files and the command-line runner.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "degsweep/analysis.hpp"
#include "degsweep/dynamics.hpp"

namespace degsweep::cli {

struct OutputSection {
    std::string dir = "out";
    std::size_t grid_points = 1000;
};

struct ScenarioDocument {
    dynamics::Scenario scenario;
    OutputSection output;
    /// FNV-1a of the document bytes.
    std::uint64_t hash = 0;
};

/// Parses a JSON scenario document. Unknown keys, wrong types and size
/// mismatches raise ParseError (with line/column or JSON pointer); a
/// well-formed scenario that breaks a hypothesis raises ValidationError
/// naming it. With validate = false only structural checks run.
[[nodiscard]] ScenarioDocument parse_scenario(std::string_view text, bool validate = true,
                                              const analysis::Sampler& sampler = {});

[[nodiscard]] ScenarioDocument load_scenario(const std::filesystem::path& path, bool validate = true,
                                             const analysis::Sampler& sampler = {});

/// Columns t, x_1..x_n, z_1..z_n, phi; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const dynamics::Trajectory& traj);

/// Inverse of write_trajectory_csv. Throws ParseError.
[[nodiscard]] dynamics::Trajectory read_trajectory_csv(std::istream& is, double lambda);

/// Entry point of the `degsweep` tool. Exit codes: 0 all checks pass,
/// 2 a bound check failed, 1 any error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace degsweep::cli
