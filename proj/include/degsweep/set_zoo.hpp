#pragma once

// Moving sets C(t, x), their frozen instances, exact distances and nearest
// point projections.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "degsweep/common.hpp"

namespace degsweep::sets {

// ── Moving-set descriptions ──────────────────────────────────────────────────

/// C(t,x) = { z : <zeta(t), z> <= beta(t,x) } with
///   zeta(t)   = cos(rate t) zeta + sin(rate t) zeta_perp,
///   beta(t,x) = beta0 + kappa_t t + state_lipschitz <u, x>.
/// zeta_perp is only read when rotation_rate != 0; u only when
/// state_lipschitz != 0.
struct HalfSpaceSpec {
    Vec zeta;
    Vec zeta_perp;
    double rotation_rate = 0.0;
    double beta0 = 0.0;
    double kappa_t = 0.0;
    double state_lipschitz = 0.0;
    Vec u;

    [[nodiscard]] Vec normal_at(double t) const;
    [[nodiscard]] double offset_at(double t, const Vec& x) const;
};

/// Closed ball with center c0 + velocity t + state_gain x.
struct BallSpec {
    Vec center;
    Vec velocity;
    double state_gain = 0.0;
    double radius = 1.0;
};

/// Axis-aligned box with affine-in-time corners.
struct BoxSpec {
    Vec lower;
    Vec upper;
    Vec lower_velocity;
    Vec upper_velocity;
};

struct HalfSpaceIntersectionSpec {
    std::vector<HalfSpaceSpec> members;
};

/// apex(t) + { (a,b) : b >= -|a| }, n = 2 only.
struct Wedge2DSpec {
    Vec apex;
    Vec velocity;
};

using ConvexSpec = std::variant<HalfSpaceSpec, BallSpec, BoxSpec, HalfSpaceIntersectionSpec>;

struct UnionSpec {
    std::vector<ConvexSpec> members;
};

class MovingSetSpec {
public:
    using Variant = std::variant<HalfSpaceSpec, BallSpec, BoxSpec, HalfSpaceIntersectionSpec,
                                 Wedge2DSpec, UnionSpec>;

    /// Checks dimensions, unit normals (at a few sample times) and radii.
    /// Throws InvalidSetSpec / DimensionMismatch.
    explicit MovingSetSpec(Variant v);

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return n_; }
    [[nodiscard]] bool is_convex() const noexcept;
    /// Declared state-Lipschitz constant L of (t,x) -> C(t,x).
    [[nodiscard]] double state_lipschitz() const noexcept;
    [[nodiscard]] bool state_independent() const noexcept { return state_lipschitz() == 0.0; }

private:
    Variant v_;
    Eigen::Index n_ = 0;
};

// ── Frozen instances ─────────────────────────────────────────────────────────

/// { z : <normal, z> <= offset }.
struct HalfSpace {
    Vec normal;
    double offset = 0.0;
};

struct Ball {
    Vec center;
    double radius = 1.0;
};

struct Box {
    Vec lower;
    Vec upper;
};

struct Polyhedron {
    std::vector<HalfSpace> faces;
};

struct Wedge2D {
    Vec apex;
};

using ConvexPiece = std::variant<HalfSpace, Ball, Box, Polyhedron>;

struct Union {
    std::vector<ConvexPiece> members;
};

struct ProjectionOptions {
    double tol = 1e-10;
    int max_iter = 100000;
};

/// Gap below which two candidate nearest points count as a tie.
inline constexpr double kTieGap = 1e-9;

/// C(t,x) frozen at one (t,x). Immutable; all queries are const and
/// thread-safe.
class SetInstance {
public:
    using Shape = std::variant<HalfSpace, Ball, Box, Polyhedron, Wedge2D, Union>;

    /// Throws EmptyInstance if the shape is empty, DimensionMismatch on
    /// inconsistent member sizes.
    explicit SetInstance(Shape shape, ProjectionOptions opts = {});

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return n_; }
    [[nodiscard]] bool is_convex() const noexcept;
    /// 1 for convex shapes, 2 for the wedge, member count for unions.
    [[nodiscard]] std::size_t max_projections() const noexcept;

    [[nodiscard]] bool contains(const Vec& z, double tol = 1e-12) const;
    [[nodiscard]] double distance(const Vec& z) const;

    /// All nearest points, ties within kTieGap included, sorted
    /// lexicographically.
    [[nodiscard]] std::vector<Vec> project(const Vec& z) const;

    /// Nearest points of every piece whose distance lies within `slack` of
    /// the minimum. With slack = kTieGap this is project().
    [[nodiscard]] std::vector<Vec> near_projections(const Vec& z, double slack) const;

    /// Reference points and a length scale locating the set; used by the
    /// tube samplers.
    [[nodiscard]] std::vector<Vec> anchors() const;
    [[nodiscard]] double extent() const;

private:
    Shape shape_;
    ProjectionOptions opts_;
    Eigen::Index n_ = 0;
};

[[nodiscard]] SetInstance instantiate(const MovingSetSpec& spec, double t, const Vec& x,
                                      ProjectionOptions opts = {});

/// Lexicographically smallest candidate. Throws EmptyCandidates.
[[nodiscard]] Vec select_projection(std::span<const Vec> candidates);

struct DykstraResult {
    Vec point;
    int iterations = 0;
};

/// Nearest point of z onto the intersection of half-spaces by Dykstra's
/// alternating corrections. Stops once the iterate is feasible to `tol` and
/// the complementarity gap certifies ||p - Proj(z)|| <= tol.
/// Throws EmptyInstance, ProjectionNotConverged.
[[nodiscard]] DykstraResult dykstra_project(std::span<const HalfSpace> members, const Vec& z,
                                            double tol = 1e-10, int max_iter = 100000);

/// Feasibility test by cyclic projections; false means no point satisfying
/// every face within 1e-9 was found.
[[nodiscard]] bool polyhedron_nonempty(std::span<const HalfSpace> faces, int max_cycles = 100000);

}  // namespace degsweep::sets
