#include "degsweep/set_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "dykstra_core.hpp"

namespace degsweep::sets {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kUnitTol = 1e-12;

Vec zeros_if_empty(const Vec& v, Eigen::Index n) { return v.size() == 0 ? Vec::Zero(n) : v; }

// ── Spec validation ──────────────────────────────────────────────────────────

void check_unit(const Vec& v, const char* what) {
    if (std::abs(v.norm() - 1.0) > kUnitTol) {
        throw InvalidSetSpec(std::string(what) + " must have unit norm");
    }
}

Eigen::Index normalize(HalfSpaceSpec& s) {
    const Eigen::Index n = s.zeta.size();
    if (n == 0) throw InvalidSetSpec("half-space: zeta is empty");
    require_finite(s.zeta, "half-space zeta");
    check_unit(s.zeta, "half-space zeta");
    if (!std::isfinite(s.rotation_rate) || !std::isfinite(s.beta0) || !std::isfinite(s.kappa_t) ||
        !std::isfinite(s.state_lipschitz)) {
        throw InvalidSetSpec("half-space: non-finite parameter");
    }
    if (s.rotation_rate != 0.0) {
        require_dim(s.zeta_perp, n, "half-space zeta_perp");
        check_unit(s.zeta_perp, "half-space zeta_perp");
        if (std::abs(s.zeta.dot(s.zeta_perp)) > kUnitTol) {
            throw InvalidSetSpec("half-space: zeta_perp must be orthogonal to zeta");
        }
    }
    if (s.state_lipschitz < 0.0) throw InvalidSetSpec("half-space: L_state must be >= 0");
    if (s.state_lipschitz != 0.0) {
        require_dim(s.u, n, "half-space u");
        check_unit(s.u, "half-space u");
    } else if (s.u.size() == 0) {
        s.u = Vec::Zero(n);
    }
    // The rotating normal stays unit by construction; confirm at sample times.
    for (double t : {0.0, 0.25, 1.0, 10.0}) check_unit(s.normal_at(t), "half-space zeta(t)");
    return n;
}

Eigen::Index normalize(BallSpec& s) {
    const Eigen::Index n = s.center.size();
    if (n == 0) throw InvalidSetSpec("ball: center is empty");
    require_finite(s.center, "ball center");
    s.velocity = zeros_if_empty(s.velocity, n);
    require_dim(s.velocity, n, "ball velocity");
    require_finite(s.velocity, "ball velocity");
    if (!(s.radius > 0.0) || !std::isfinite(s.radius)) throw InvalidSetSpec("ball: radius must be > 0");
    if (!std::isfinite(s.state_gain)) throw InvalidSetSpec("ball: non-finite state gain");
    return n;
}

Eigen::Index normalize(BoxSpec& s) {
    const Eigen::Index n = s.lower.size();
    if (n == 0) throw InvalidSetSpec("box: lower is empty");
    require_dim(s.upper, n, "box upper");
    s.lower_velocity = zeros_if_empty(s.lower_velocity, n);
    s.upper_velocity = zeros_if_empty(s.upper_velocity, n);
    require_dim(s.lower_velocity, n, "box lower_velocity");
    require_dim(s.upper_velocity, n, "box upper_velocity");
    for (const Vec* v : {&s.lower, &s.upper, &s.lower_velocity, &s.upper_velocity}) {
        require_finite(*v, "box");
    }
    if ((s.lower.array() > s.upper.array()).any()) throw InvalidSetSpec("box: lower > upper at t = 0");
    return n;
}

Eigen::Index normalize(HalfSpaceIntersectionSpec& s) {
    if (s.members.empty()) throw InvalidSetSpec("half-space intersection: no members");
    const Eigen::Index n = normalize(s.members.front());
    for (auto& m : s.members) {
        if (normalize(m) != n) throw DimensionMismatch("half-space intersection: member dimensions differ");
    }
    return n;
}

Eigen::Index normalize(Wedge2DSpec& s) {
    if (s.apex.size() != 2) throw DimensionMismatch("wedge2d: apex must be 2-dimensional");
    s.velocity = zeros_if_empty(s.velocity, 2);
    require_dim(s.velocity, 2, "wedge2d velocity");
    require_finite(s.apex, "wedge2d apex");
    require_finite(s.velocity, "wedge2d velocity");
    return 2;
}

Eigen::Index normalize(UnionSpec& s) {
    if (s.members.empty()) throw InvalidSetSpec("union: no members");
    Eigen::Index n = -1;
    for (auto& m : s.members) {
        const Eigen::Index k = std::visit([](auto& c) { return normalize(c); }, m);
        if (n >= 0 && k != n) throw DimensionMismatch("union: member dimensions differ");
        n = k;
    }
    return n;
}

double lipschitz_of(const ConvexSpec& c) {
    return std::visit(Overloaded{
                          [](const HalfSpaceSpec& h) { return h.state_lipschitz; },
                          [](const BallSpec& b) { return std::abs(b.state_gain); },
                          [](const BoxSpec&) { return 0.0; },
                          [](const HalfSpaceIntersectionSpec& p) {
                              double l = 0.0;
                              for (const auto& m : p.members) l = std::max(l, m.state_lipschitz);
                              return l;
                          },
                      },
                      c);
}

// ── Instantiation ────────────────────────────────────────────────────────────

HalfSpace freeze(const HalfSpaceSpec& s, double t, const Vec& x) {
    return {s.normal_at(t), s.offset_at(t, x)};
}

Ball freeze(const BallSpec& s, double t, const Vec& x) {
    Vec c = s.center + t * s.velocity;
    if (s.state_gain != 0.0) c += s.state_gain * x;
    return {std::move(c), s.radius};
}

Box freeze(const BoxSpec& s, double t, const Vec&) {
    return {s.lower + t * s.lower_velocity, s.upper + t * s.upper_velocity};
}

Polyhedron freeze(const HalfSpaceIntersectionSpec& s, double t, const Vec& x) {
    Polyhedron p;
    p.faces.reserve(s.members.size());
    for (const auto& m : s.members) p.faces.push_back(freeze(m, t, x));
    return p;
}

ConvexPiece freeze(const ConvexSpec& c, double t, const Vec& x) {
    return std::visit([&](const auto& s) -> ConvexPiece { return freeze(s, t, x); }, c);
}

// ── Per-piece geometry ───────────────────────────────────────────────────────

struct Candidate {
    double dist;
    Vec point;
};

Eigen::Index dim_of(const ConvexPiece& p) {
    return std::visit(Overloaded{
                          [](const HalfSpace& h) { return h.normal.size(); },
                          [](const Ball& b) { return b.center.size(); },
                          [](const Box& b) { return b.lower.size(); },
                          [](const Polyhedron& p) {
                              return p.faces.empty() ? Eigen::Index{0} : p.faces.front().normal.size();
                          },
                      },
                      p);
}

void check_piece(const ConvexPiece& piece, Eigen::Index n) {
    std::visit(Overloaded{
                   [&](const HalfSpace& h) {
                       require_dim(h.normal, n, "half-space normal");
                       require_finite(h.normal, "half-space normal");
                       if (!(h.normal.norm() > 0.0) || !std::isfinite(h.offset)) {
                           throw InvalidSetSpec("half-space with zero normal or non-finite offset");
                       }
                   },
                   [&](const Ball& b) {
                       require_dim(b.center, n, "ball center");
                       require_finite(b.center, "ball center");
                       if (!(b.radius >= 0.0)) throw EmptyInstance("ball with negative radius");
                   },
                   [&](const Box& b) {
                       require_dim(b.lower, n, "box lower");
                       require_dim(b.upper, n, "box upper");
                       require_finite(b.lower, "box lower");
                       require_finite(b.upper, "box upper");
                       if ((b.lower.array() > b.upper.array()).any()) {
                           throw EmptyInstance("box with lower > upper");
                       }
                   },
                   [&](const Polyhedron& p) {
                       if (p.faces.empty()) throw InvalidSetSpec("polyhedron without faces");
                       for (const auto& f : p.faces) require_dim(f.normal, n, "polyhedron face");
                       if (!polyhedron_nonempty(p.faces)) {
                           throw EmptyInstance("half-space intersection is empty");
                       }
                   },
               },
               piece);
}

Candidate nearest(const ConvexPiece& piece, const Vec& z, const ProjectionOptions& opts) {
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) -> Candidate {
                const double an = h.normal.norm();
                const double excess = h.normal.dot(z) - h.offset;
                if (excess <= 0.0) return {0.0, z};
                return {excess / an, z - (excess / (an * an)) * h.normal};
            },
            [&](const Ball& b) -> Candidate {
                const Vec diff = z - b.center;
                const double r = diff.norm();
                if (r <= b.radius) return {0.0, z};
                return {r - b.radius, b.center + (b.radius / r) * diff};
            },
            [&](const Box& b) -> Candidate {
                Vec p = z.cwiseMax(b.lower).cwiseMin(b.upper);
                return {(z - p).norm(), std::move(p)};
            },
            [&](const Polyhedron& p) -> Candidate {
                if (detail::max_violation(p.faces, z) <= 0.0) return {0.0, z};
                auto res = detail::dykstra_unchecked(p.faces, z, opts.tol, opts.max_iter);
                const double d = (z - res.point).norm();
                return {d, std::move(res.point)};
            },
        },
        piece);
}

// Candidates of the wedge apex + {b >= -|a|}: the point itself when inside,
// otherwise the feet on both boundary rays.
std::vector<Candidate> wedge_candidates(const Wedge2D& w, const Vec& z) {
    const double a = z[0] - w.apex[0];
    const double b = z[1] - w.apex[1];
    if (b >= -std::abs(a)) return {{0.0, z}};
    const double s2 = std::sqrt(2.0);
    // Ray b = -a, a >= 0.
    Vec right(2);
    right << w.apex[0] + 0.5 * (a - b), w.apex[1] + 0.5 * (b - a);
    // Ray b = a, a <= 0.
    Vec left(2);
    left << w.apex[0] + 0.5 * (a + b), w.apex[1] + 0.5 * (a + b);
    return {{-(a + b) / s2, std::move(right)}, {(a - b) / s2, std::move(left)}};
}

std::vector<Candidate> all_candidates(const SetInstance::Shape& shape, const Vec& z,
                                      const ProjectionOptions& opts) {
    return std::visit(Overloaded{
                          [&](const Wedge2D& w) { return wedge_candidates(w, z); },
                          [&](const Union& u) {
                              std::vector<Candidate> out;
                              out.reserve(u.members.size());
                              for (const auto& m : u.members) out.push_back(nearest(m, z, opts));
                              return out;
                          },
                          [&](const auto& piece) {
                              return std::vector<Candidate>{nearest(ConvexPiece{piece}, z, opts)};
                          },
                      },
                      shape);
}

Vec anchor_of(const ConvexPiece& piece, const ProjectionOptions& opts) {
    return std::visit(Overloaded{
                          [](const HalfSpace& h) -> Vec {
                              return (h.offset / h.normal.squaredNorm()) * h.normal;
                          },
                          [](const Ball& b) -> Vec { return b.center; },
                          [](const Box& b) -> Vec { return 0.5 * (b.lower + b.upper); },
                          [&](const Polyhedron& p) -> Vec {
                              const Vec origin = Vec::Zero(p.faces.front().normal.size());
                              return nearest(ConvexPiece{p}, origin, opts).point;
                          },
                      },
                      piece);
}

double extent_of(const ConvexPiece& piece) {
    return std::visit(Overloaded{
                          [](const HalfSpace&) { return 0.0; },
                          [](const Ball& b) { return b.radius; },
                          [](const Box& b) { return 0.5 * (b.upper - b.lower).norm(); },
                          [](const Polyhedron&) { return 0.0; },
                      },
                      piece);
}

}  // namespace

// ── HalfSpaceSpec ────────────────────────────────────────────────────────────

Vec HalfSpaceSpec::normal_at(double t) const {
    if (rotation_rate == 0.0) return zeta;
    return std::cos(rotation_rate * t) * zeta + std::sin(rotation_rate * t) * zeta_perp;
}

double HalfSpaceSpec::offset_at(double t, const Vec& x) const {
    double beta = beta0 + kappa_t * t;
    if (state_lipschitz != 0.0) beta += state_lipschitz * u.dot(x);
    return beta;
}

// ── MovingSetSpec ────────────────────────────────────────────────────────────

MovingSetSpec::MovingSetSpec(Variant v) : v_(std::move(v)) {
    n_ = std::visit([](auto& s) { return normalize(s); }, v_);
}

bool MovingSetSpec::is_convex() const noexcept {
    return !std::holds_alternative<Wedge2DSpec>(v_) && !std::holds_alternative<UnionSpec>(v_);
}

double MovingSetSpec::state_lipschitz() const noexcept {
    return std::visit(Overloaded{
                          [](const Wedge2DSpec&) { return 0.0; },
                          [](const UnionSpec& u) {
                              double l = 0.0;
                              for (const auto& m : u.members) l = std::max(l, lipschitz_of(m));
                              return l;
                          },
                          [](const auto& c) { return lipschitz_of(ConvexSpec{c}); },
                      },
                      v_);
}

SetInstance instantiate(const MovingSetSpec& spec, double t, const Vec& x, ProjectionOptions opts) {
    if (!std::isfinite(t)) throw NonFiniteValue("instantiate: non-finite time");
    require_dim(x, spec.dimension(), "instantiate state");
    require_finite(x, "instantiate state");
    SetInstance::Shape shape = std::visit(
        Overloaded{
            [&](const Wedge2DSpec& w) -> SetInstance::Shape { return Wedge2D{w.apex + t * w.velocity}; },
            [&](const UnionSpec& u) -> SetInstance::Shape {
                Union out;
                out.members.reserve(u.members.size());
                for (const auto& m : u.members) out.members.push_back(freeze(m, t, x));
                return out;
            },
            [&](const auto& s) -> SetInstance::Shape { return freeze(s, t, x); },
        },
        spec.variant());
    return SetInstance(std::move(shape), opts);
}

// ── SetInstance ──────────────────────────────────────────────────────────────

SetInstance::SetInstance(Shape shape, ProjectionOptions opts) : shape_(std::move(shape)), opts_(opts) {
    std::visit(Overloaded{
                   [&](const Wedge2D& w) {
                       require_dim(w.apex, 2, "wedge2d apex");
                       require_finite(w.apex, "wedge2d apex");
                       n_ = 2;
                   },
                   [&](const Union& u) {
                       if (u.members.empty()) throw EmptyInstance("union without members");
                       n_ = dim_of(u.members.front());
                       for (const auto& m : u.members) check_piece(m, n_);
                   },
                   [&](const auto& piece) {
                       n_ = dim_of(ConvexPiece{piece});
                       check_piece(ConvexPiece{piece}, n_);
                   },
               },
               shape_);
    if (n_ == 0) throw InvalidSetSpec("zero-dimensional set");
}

bool SetInstance::is_convex() const noexcept {
    return !std::holds_alternative<Wedge2D>(shape_) && !std::holds_alternative<Union>(shape_);
}

std::size_t SetInstance::max_projections() const noexcept {
    if (std::holds_alternative<Wedge2D>(shape_)) return 2;
    if (const auto* u = std::get_if<Union>(&shape_)) return u->members.size();
    return 1;
}

bool SetInstance::contains(const Vec& z, double tol) const { return distance(z) <= tol; }

double SetInstance::distance(const Vec& z) const {
    require_dim(z, n_, "distance");
    require_finite(z, "distance");
    double best = kInf;
    for (const auto& c : all_candidates(shape_, z, opts_)) best = std::min(best, c.dist);
    return best;
}

std::vector<Vec> SetInstance::project(const Vec& z) const { return near_projections(z, kTieGap); }

std::vector<Vec> SetInstance::near_projections(const Vec& z, double slack) const {
    require_dim(z, n_, "project");
    require_finite(z, "project");
    auto cands = all_candidates(shape_, z, opts_);
    double best = kInf;
    for (const auto& c : cands) best = std::min(best, c.dist);

    std::vector<Vec> out;
    const double dedupe = 1e-12 * std::max(1.0, z.norm());
    for (auto& c : cands) {
        if (c.dist > best + slack) continue;
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const Vec& p) { return (p - c.point).norm() <= dedupe; });
        if (!dup) out.push_back(std::move(c.point));
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

std::vector<Vec> SetInstance::anchors() const {
    return std::visit(Overloaded{
                          [](const Wedge2D& w) { return std::vector<Vec>{w.apex}; },
                          [&](const Union& u) {
                              std::vector<Vec> out;
                              for (const auto& m : u.members) out.push_back(anchor_of(m, opts_));
                              return out;
                          },
                          [&](const auto& piece) {
                              return std::vector<Vec>{anchor_of(ConvexPiece{piece}, opts_)};
                          },
                      },
                      shape_);
}

double SetInstance::extent() const {
    return std::visit(Overloaded{
                          [](const Wedge2D&) { return 0.0; },
                          [](const Union& u) {
                              double e = 0.0;
                              for (const auto& m : u.members) e = std::max(e, extent_of(m));
                              return e;
                          },
                          [](const auto& piece) { return extent_of(ConvexPiece{piece}); },
                      },
                      shape_);
}

Vec select_projection(std::span<const Vec> candidates) {
    if (candidates.empty()) throw EmptyCandidates("select_projection: no candidates");
    return *std::min_element(candidates.begin(), candidates.end(), lex_less);
}

}  // namespace degsweep::sets
