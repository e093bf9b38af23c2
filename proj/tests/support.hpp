#pragma once

// Shared helpers for the test binaries: seeded random vectors, small vector
// literals and brute-force geometric oracles that share no code with the
// library.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "degsweep/common.hpp"

namespace testsupport {

using degsweep::Vec;

inline Vec v(std::initializer_list<double> xs) {
    Vec out(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) out[i++] = x;
    return out;
}

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = u(rng);
    return out;
}

inline Vec random_unit(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec out(n);
    do {
        for (Eigen::Index i = 0; i < n; ++i) out[i] = g(rng);
    } while (out.norm() < 1e-6);
    return out / out.norm();
}

/// Minimum of |z - curve(s)| over `samples` equally spaced s in [s0, s1].
inline double brute_curve_distance(const Vec& z, const std::function<Vec(double)>& curve, double s0, double s1,
                                   int samples) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        const double s = s0 + (s1 - s0) * k / samples;
        best = std::min(best, (z - curve(s)).norm());
    }
    return best;
}

inline std::string scenario_path(const std::string& name) {
    return std::string(DEGSWEEP_SCENARIO_DIR) + "/" + name;
}

/// Empty per-binary scratch directory under the build tree.
inline std::filesystem::path fresh_scratch(const std::string& sub) {
    const auto dir = std::filesystem::path(DEGSWEEP_SCRATCH_DIR) / sub;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace testsupport
