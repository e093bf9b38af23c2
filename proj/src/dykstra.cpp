#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>
#include <string>

#include "degsweep/set_zoo.hpp"
#include "dykstra_core.hpp"

namespace degsweep::sets {
namespace detail {

namespace {

void check_faces(std::span<const HalfSpace> faces, Eigen::Index n) {
    for (const auto& f : faces) {
        require_dim(f.normal, n, "half-space normal");
        if (!(f.normal.norm() > 0.0) || !std::isfinite(f.offset)) {
            throw InvalidSetSpec("half-space with zero normal or non-finite offset");
        }
    }
}

// Exact KKT point on the faces that are nearly tight at x. Returns nothing
// unless the result is primal and dual feasible and within 16 tol_abs of x.
std::optional<Vec> polish(std::span<const HalfSpace> faces, const Vec& z, const Vec& x, double tol_abs,
                          double active_floor);

}  // namespace

double max_violation(std::span<const HalfSpace> faces, const Vec& z) {
    double worst = -kInf;
    for (const auto& f : faces) {
        worst = std::max(worst, (f.normal.dot(z) - f.offset) / f.normal.norm());
    }
    return worst;
}

DykstraResult dykstra_unchecked(std::span<const HalfSpace> members, const Vec& z, double tol,
                                int max_iter) {
    if (members.empty()) return {z, 0};
    if (!(tol > 0.0)) throw std::invalid_argument("dykstra_project: tol must be positive");
    check_faces(members, z.size());

    if (max_violation(members, z) <= 0.0) return {z, 0};

    double scale = std::max(1.0, z.norm());
    for (const auto& f : members) scale = std::max(scale, std::abs(f.offset) / f.normal.norm());
    const double tol_abs = tol * scale;
    const double active_floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;

    const std::size_t m = members.size();
    Vec x = z;
    std::vector<Vec> corrections(m, Vec::Zero(z.size()));
    Vec u(z.size());

    for (int it = 1; it <= max_iter; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto& f = members[i];
            u = x + corrections[i];
            const double excess = f.normal.dot(u) - f.offset;
            if (excess > 0.0) {
                x = u - (excess / f.normal.squaredNorm()) * f.normal;
            } else {
                x = u;
            }
            corrections[i] = u - x;
        }

        // z - x = sum_i mu_i a_i with mu_i >= 0 holds by construction, so
        // feasibility plus a small complementarity gap sum_i mu_i slack_i
        // bounds ||x - Proj(z)||^2 <= gap.
        if (max_violation(members, x) > tol_abs) continue;
        double gap = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double an = members[i].normal.norm();
            const double slack = (members[i].offset - members[i].normal.dot(x)) / an;
            if (slack <= active_floor) continue;
            gap += corrections[i].norm() * slack;
        }
        if (gap <= tol_abs * tol_abs) {
            if (auto q = polish(members, z, x, tol_abs, active_floor)) return {*q, it};
            return {x, it};
        }
    }
    throw ProjectionNotConverged("Dykstra projection did not reach tol " + std::to_string(tol) +
                                 " within " + std::to_string(max_iter) + " cycles");
}

namespace {

std::optional<Vec> polish(std::span<const HalfSpace> faces, const Vec& z, const Vec& x, double tol_abs,
                          double active_floor) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const double slack = (faces[i].offset - faces[i].normal.dot(x)) / faces[i].normal.norm();
        if (slack <= 16.0 * tol_abs) active.push_back(i);
    }
    // Drop the face with the most negative multiplier until the KKT point
    // is dual feasible.
    while (!active.empty()) {
        const Eigen::Index k = static_cast<Eigen::Index>(active.size());
        Mat normals(k, z.size());
        Vec offsets(k);
        for (Eigen::Index r = 0; r < k; ++r) {
            const auto& f = faces[active[static_cast<std::size_t>(r)]];
            normals.row(r) = f.normal.transpose() / f.normal.norm();
            offsets[r] = f.offset / f.normal.norm();
        }
        const Mat gram = normals * normals.transpose();
        const Vec mu = gram.completeOrthogonalDecomposition().solve(normals * z - offsets);
        Eigen::Index worst = 0;
        if (mu.minCoeff(&worst) < -active_floor) {
            active.erase(active.begin() + worst);
            continue;
        }
        Vec q = z - normals.transpose() * mu;
        if (!q.allFinite() || (q - x).norm() > 16.0 * tol_abs) return std::nullopt;
        if (max_violation(faces, q) > active_floor) return std::nullopt;
        return q;
    }
    return std::nullopt;
}

}  // namespace

}  // namespace detail

bool polyhedron_nonempty(std::span<const HalfSpace> faces, int max_cycles) {
    if (faces.empty()) return true;
    const Eigen::Index n = faces.front().normal.size();
    detail::check_faces(faces, n);

    // Opposite parallel faces with crossed offsets: empty slab.
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const Vec ai = faces[i].normal / faces[i].normal.norm();
        const double bi = faces[i].offset / faces[i].normal.norm();
        for (std::size_t j = i + 1; j < faces.size(); ++j) {
            const Vec aj = faces[j].normal / faces[j].normal.norm();
            const double bj = faces[j].offset / faces[j].normal.norm();
            if ((ai + aj).norm() <= 1e-14 && bi + bj < -1e-12) return false;
        }
    }

    double scale = 1.0;
    for (const auto& f : faces) scale = std::max(scale, std::abs(f.offset) / f.normal.norm());
    const double feas_tol = 1e-9 * scale;

    Vec x = Vec::Zero(n);
    Vec prev(n);
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        if (detail::max_violation(faces, x) <= feas_tol) return true;
        prev = x;
        for (const auto& f : faces) {
            const double excess = f.normal.dot(x) - f.offset;
            if (excess > 0.0) x -= (excess / f.normal.squaredNorm()) * f.normal;
        }
        if ((x - prev).norm() <= 1e-15 * scale) {
            return detail::max_violation(faces, x) <= feas_tol;
        }
    }
    return detail::max_violation(faces, x) <= feas_tol;
}

DykstraResult dykstra_project(std::span<const HalfSpace> members, const Vec& z, double tol,
                              int max_iter) {
    require_finite(z, "dykstra_project");
    if (!polyhedron_nonempty(members)) {
        throw EmptyInstance("half-space intersection is empty");
    }
    return detail::dykstra_unchecked(members, z, tol, max_iter);
}

}  // namespace degsweep::sets
