#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "degsweep/cli.hpp"

namespace degsweep::cli {

namespace {

void put(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("trajectory csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const dynamics::Trajectory& traj) {
    const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
    for (Eigen::Index i = 1; i <= n; ++i) os << ",z_" << i;
    os << ",phi\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(os, traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            os << ',';
            put(os, traj.states[k][i]);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            os << ',';
            put(os, traj.images[k][i]);
        }
        os << ',';
        put(os, traj.phi[k]);
        os << '\n';
    }
}

dynamics::Trajectory read_trajectory_csv(std::istream& is, double lambda) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() < 4 || header.front() != "t" || header.back() != "phi" || (header.size() - 2) % 2 != 0) {
        throw ParseError("trajectory csv: header must be t,x_1..x_n,z_1..z_n,phi");
    }
    const auto n = static_cast<Eigen::Index>((header.size() - 2) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (header[static_cast<std::size_t>(1 + i)] != "x_" + std::to_string(i + 1) ||
            header[static_cast<std::size_t>(1 + n + i)] != "z_" + std::to_string(i + 1)) {
            throw ParseError("trajectory csv: unexpected column names");
        }
    }

    dynamics::Trajectory traj;
    traj.lambda = lambda;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ParseError("trajectory csv line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " columns");
        }
        Vec x(n);
        Vec z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = to_double(cells[static_cast<std::size_t>(1 + i)], line_no);
            z[i] = to_double(cells[static_cast<std::size_t>(1 + n + i)], line_no);
        }
        const double t = to_double(cells.front(), line_no);
        if (!traj.times.empty() && !(t > traj.times.back())) {
            throw ParseError("trajectory csv line " + std::to_string(line_no) + ": times must increase");
        }
        traj.times.push_back(t);
        traj.states.push_back(std::move(x));
        traj.images.push_back(std::move(z));
        traj.phi.push_back(to_double(cells.back(), line_no));
    }
    if (traj.times.empty()) throw ParseError("trajectory csv: no rows");
    traj.stats.accepted = traj.size() - 1;
    return traj;
}

}  // namespace degsweep::cli
