#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "degsweep/analysis.hpp"

namespace degsweep::analysis {

const char* to_string(SamplerKind kind) {
    return kind == SamplerKind::grid ? "grid" : "monte_carlo";
}

namespace {

std::vector<Vec> lattice_samples(Eigen::Index n, double r, std::size_t count) {
    const double per_axis = std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(count, 1)),
                                               1.0 / static_cast<double>(n)));
    auto k = std::max<long>(3, static_cast<long>(per_axis));
    if (k % 2 == 0) ++k;  // odd: the lattice contains 0 and the axes
    const double spacing = 2.0 * r / static_cast<double>(k - 1);

    std::vector<Vec> out;
    std::vector<long> idx(static_cast<std::size_t>(n), 0);
    Vec z(n);
    const double inside = r * (1.0 + 1e-12);
    while (true) {
        bool on_shell = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const long j = idx[static_cast<std::size_t>(i)];
            z[i] = (j == (k - 1) / 2) ? 0.0 : -r + spacing * static_cast<double>(j);
            on_shell = on_shell || j == 0 || j == k - 1;
        }
        const double norm = z.norm();
        if (norm <= inside) out.push_back(z);
        // Cube-surface points pushed radially onto the sphere.
        if (on_shell && norm > inside && norm > 0.0) out.push_back(z * (r / norm));

        Eigen::Index i = 0;
        while (i < n && ++idx[static_cast<std::size_t>(i)] == k) {
            idx[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == n) break;
    }
    return out;
}

std::vector<Vec> uniform_ball_samples(Eigen::Index n, double r, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec> out;
    out.reserve(count);
    Vec d(n);
    while (out.size() < count) {
        for (Eigen::Index i = 0; i < n; ++i) d[i] = gauss(rng);
        const double norm = d.norm();
        if (norm == 0.0) continue;
        out.push_back(d * (r * std::pow(unif(rng), 1.0 / static_cast<double>(n)) / norm));
    }
    return out;
}

std::vector<Vec> unit_vectors(const Vec& y, std::span<const Vec> points) {
    std::vector<Vec> g;
    g.reserve(points.size());
    for (const auto& p : points) {
        const Vec diff = y - p;
        const double norm = diff.norm();
        if (norm > 0.0) g.push_back(diff / norm);
    }
    return g;
}

// Euclidean projection onto the probability simplex.
Vec project_simplex(const Vec& v) {
    const Eigen::Index m = v.size();
    std::vector<double> s(v.data(), v.data() + m);
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        cum += s[static_cast<std::size_t>(i)];
        const double candidate = (cum - 1.0) / static_cast<double>(i + 1);
        if (s[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
    }
    return (v.array() - theta).cwiseMax(0.0);
}

}  // namespace

std::vector<Vec> ball_samples(Eigen::Index n, double r, const Sampler& sampler) {
    if (n <= 0) throw std::invalid_argument("ball_samples: dimension must be positive");
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("ball_samples: radius must be finite >= 0");
    if (sampler.count < 1) throw std::invalid_argument("ball_samples: count must be >= 1");
    if (r == 0.0) return {Vec::Zero(n)};
    if (sampler.kind == SamplerKind::grid) return lattice_samples(n, r, sampler.count);
    return uniform_ball_samples(n, r, sampler.count, sampler.seed);
}

double truncated_hausdorff(const sets::SetInstance& a, const sets::SetInstance& b, std::span<const Vec> samples) {
    if (a.dimension() != b.dimension()) throw DimensionMismatch("truncated_hausdorff: dimensions differ");
    double best = 0.0;
    for (const auto& z : samples) best = std::max(best, std::abs(a.distance(z) - b.distance(z)));
    return best;
}

double truncated_hausdorff(const sets::SetInstance& a, const sets::SetInstance& b, double r,
                           const Sampler& sampler) {
    if (!(r > 0.0)) throw std::invalid_argument("truncated_hausdorff: r must be > 0");
    const auto samples = ball_samples(a.dimension(), r, sampler);
    return truncated_hausdorff(a, b, samples);
}

KappaEstimate estimate_kappa(const sets::MovingSetSpec& spec, double r, const KappaQuery& query,
                             const Sampler& sampler) {
    const Eigen::Index n = spec.dimension();
    const auto samples = ball_samples(n, r, sampler);
    const Vec x_ref = query.x_ref.size() == 0 ? Vec(Vec::Zero(n)) : query.x_ref;

    KappaEstimate out;
    for (const auto& [s, t] : query.t_pairs) {
        const double dt = std::abs(t - s);
        if (!(dt > 0.0)) continue;
        const auto a = sets::instantiate(spec, s, x_ref);
        const auto b = sets::instantiate(spec, t, x_ref);
        out.kappa_r = std::max(out.kappa_r, truncated_hausdorff(a, b, samples) / dt);
        ++out.t_pairs_used;
    }
    for (const auto& [x, y] : query.x_pairs) {
        const double dx = (x - y).norm();
        if (!(dx > 0.0)) continue;
        const auto a = sets::instantiate(spec, query.t_ref, x);
        const auto b = sets::instantiate(spec, query.t_ref, y);
        out.lipschitz_state = std::max(out.lipschitz_state, truncated_hausdorff(a, b, samples) / dx);
        ++out.x_pairs_used;
    }
    return out;
}

double min_norm_in_hull(std::span<const Vec> points) {
    if (points.empty()) throw std::invalid_argument("min_norm_in_hull: no points");
    if (points.size() == 1) return points.front().norm();
    if (points.size() == 2) {
        const Vec& a = points[0];
        const Vec edge = points[1] - a;
        const double len2 = edge.squaredNorm();
        const double s = len2 > 0.0 ? std::clamp(-a.dot(edge) / len2, 0.0, 1.0) : 0.0;
        return (a + s * edge).norm();
    }

    // Projected gradient on the simplex weights of f(w) = |G w|^2 / 2.
    const auto m = static_cast<Eigen::Index>(points.size());
    Mat G(points.front().size(), m);
    for (Eigen::Index j = 0; j < m; ++j) G.col(j) = points[static_cast<std::size_t>(j)];
    const Mat gram = G.transpose() * G;
    const double lip = std::max(gram.trace(), 1e-300);
    Vec w = Vec::Constant(m, 1.0 / static_cast<double>(m));
    for (int it = 0; it < 20000; ++it) {
        const Vec next = project_simplex(w - gram * w / lip);
        const double change = (next - w).lpNorm<Eigen::Infinity>();
        w = next;
        if (change < 1e-15) break;
    }
    return (G * w).norm();
}

double estimate_alpha(const sets::SetInstance& inst, double rho, std::size_t sample_count, std::uint64_t seed,
                      double hull_band) {
    if (sample_count < 1) throw std::invalid_argument("estimate_alpha: sample_count must be >= 1");
    if (!(rho > 0.0)) throw std::invalid_argument("estimate_alpha: rho must be > 0");

    const Eigen::Index n = inst.dimension();
    const auto anchors = inst.anchors();
    const double extent = inst.extent();
    const double half_width = extent + (std::isfinite(rho) ? rho : std::max(1.0, extent));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const std::size_t max_draws = 100 * sample_count;

    double best = 1.0;
    std::size_t hits = 0;
    Vec y(n);
    for (std::size_t draw = 0; draw < max_draws && hits < sample_count; ++draw) {
        const Vec& anchor = anchors[draw % anchors.size()];
        for (Eigen::Index i = 0; i < n; ++i) y[i] = anchor[i] + half_width * unif(rng);
        const double d = inst.distance(y);
        if (!(d > 0.0 && d < rho)) continue;
        ++hits;
        const auto near = inst.near_projections(y, hull_band * d);
        const auto grads = unit_vectors(y, near);
        if (grads.empty()) continue;
        best = std::min(best, min_norm_in_hull(grads));
    }
    if (hits == 0) {
        throw TubeSamplingFailed("estimate_alpha: no sample landed in the tube after " +
                                 std::to_string(max_draws) + " draws");
    }
    return best;
}

}  // namespace degsweep::analysis
