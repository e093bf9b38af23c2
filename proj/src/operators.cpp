#include "degsweep/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace degsweep::ops {

OperatorSpec OperatorSpec::identity(Eigen::Index n) {
    if (n <= 0) throw InvalidOperator("identity: dimension must be positive");
    return OperatorSpec(Identity{}, n, 1.0, 1.0, false);
}

OperatorSpec OperatorSpec::scaled_identity(Eigen::Index n, double gamma) {
    if (n <= 0) throw InvalidOperator("scaled identity: dimension must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidOperator("scaled identity: gamma must be > 0");
    }
    return OperatorSpec(ScaledIdentity{gamma}, n, gamma, gamma, false);
}

OperatorSpec OperatorSpec::linear_spd(Mat matrix, std::optional<double> declared_m,
                                      std::optional<double> declared_M) {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
        throw InvalidOperator("linear_spd: matrix must be square and nonempty");
    }
    if (!matrix.allFinite()) throw InvalidOperator("linear_spd: non-finite entry");
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidOperator("linear_spd: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(matrix);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw InvalidOperator("linear_spd: matrix is not positive definite");

    // Declared constants are kept only when they are valid and no looser
    // than needed; anything else is replaced by the exact spectrum bounds.
    double m = lo;
    double M = hi;
    bool adjusted = false;
    if (declared_m) {
        if (*declared_m > 0.0 && *declared_m <= lo) {
            m = *declared_m;
        } else {
            adjusted = true;
        }
    }
    if (declared_M) {
        if (*declared_M >= hi && std::isfinite(*declared_M)) {
            M = *declared_M;
        } else {
            adjusted = true;
        }
    }
    return OperatorSpec(LinearSpd{std::move(matrix)}, eig.eigenvalues().size(), m, M, adjusted);
}

Vec OperatorSpec::apply(const Vec& x) const {
    require_dim(x, n_, "operator apply");
    return std::visit(
        [&](const auto& op) -> Vec {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return x;
            } else if constexpr (std::is_same_v<T, ScaledIdentity>) {
                return op.gamma * x;
            } else {
                return op.matrix * x;
            }
        },
        v_);
}

std::optional<double> OperatorSpec::scalar_multiple() const noexcept {
    if (std::holds_alternative<Identity>(v_)) return 1.0;
    if (const auto* s = std::get_if<ScaledIdentity>(&v_)) return s->gamma;
    return std::nullopt;
}

ConstantsCheck verify_constants(const OperatorSpec& op, int sample_count, double radius,
                                std::uint64_t seed) {
    if (sample_count < 2) throw std::invalid_argument("verify_constants: sample_count must be >= 2");
    const Eigen::Index n = op.dimension();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto draw = [&]() {
        Vec d(n);
        for (Eigen::Index i = 0; i < n; ++i) d[i] = gauss(rng);
        const double norm = d.norm();
        if (norm == 0.0) return Vec(Vec::Zero(n));
        return Vec(d * (radius * std::pow(unif(rng), 1.0 / static_cast<double>(n)) / norm));
    };

    ConstantsCheck out;
    out.m_hat = kInf;
    out.M_hat = 0.0;
    Vec prev = draw();
    Vec prev_img = op.apply(prev);
    for (int k = 1; k < sample_count; ++k) {
        Vec cur = draw();
        Vec cur_img = op.apply(cur);
        const Vec dx = cur - prev;
        const double dx2 = dx.squaredNorm();
        if (dx2 > 0.0) {
            const Vec dz = cur_img - prev_img;
            out.m_hat = std::min(out.m_hat, dz.dot(dx) / dx2);
            out.M_hat = std::max(out.M_hat, dz.norm() / std::sqrt(dx2));
            ++out.pairs_used;
        }
        prev = std::move(cur);
        prev_img = std::move(cur_img);
    }
    if (out.pairs_used == 0) throw DegenerateSample("verify_constants: all sampled pairs coincide");
    out.ok = out.m_hat >= op.m() * (1.0 - 1e-9) && out.M_hat <= op.M() * (1.0 + 1e-9);
    return out;
}

}  // namespace degsweep::ops
