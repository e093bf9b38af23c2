#pragma once

// The degenerate operator A and its monotonicity/Lipschitz constants.

#include <cstdint>
#include <optional>
#include <variant>

#include "degsweep/common.hpp"

namespace degsweep::ops {

struct Identity {};

struct ScaledIdentity {
    double gamma = 1.0;
};

struct LinearSpd {
    Mat matrix;
};

/// Linear operator with exact constants m (strong monotonicity) and M
/// (Lipschitz). For LinearSpd these are the extreme eigenvalues; declared
/// values that disagree are replaced and `constants_adjusted()` is set.
class OperatorSpec {
public:
    using Variant = std::variant<Identity, ScaledIdentity, LinearSpd>;

    [[nodiscard]] static OperatorSpec identity(Eigen::Index n);
    [[nodiscard]] static OperatorSpec scaled_identity(Eigen::Index n, double gamma);
    /// Throws InvalidOperator unless the matrix is square, symmetric and
    /// positive definite.
    [[nodiscard]] static OperatorSpec linear_spd(Mat matrix, std::optional<double> declared_m = {},
                                                 std::optional<double> declared_M = {});

    [[nodiscard]] Vec apply(const Vec& x) const;

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return n_; }
    [[nodiscard]] double m() const noexcept { return m_; }
    [[nodiscard]] double M() const noexcept { return M_; }
    [[nodiscard]] bool constants_adjusted() const noexcept { return adjusted_; }

    /// gamma when A = gamma * I (Identity counts as gamma = 1).
    [[nodiscard]] std::optional<double> scalar_multiple() const noexcept;

private:
    OperatorSpec(Variant v, Eigen::Index n, double m, double M, bool adjusted)
        : v_(std::move(v)), n_(n), m_(m), M_(M), adjusted_(adjusted) {}

    Variant v_;
    Eigen::Index n_;
    double m_;
    double M_;
    bool adjusted_;
};

struct ConstantsCheck {
    double m_hat = 0.0;
    double M_hat = 0.0;
    std::size_t pairs_used = 0;
    bool ok = true;
};

/// Empirical m_hat = min <Ax-Ay,x-y>/|x-y|^2 and M_hat = max |Ax-Ay|/|x-y|
/// over consecutive pairs of `sample_count` points drawn uniformly in the
/// ball of given radius. `ok` is false if the sample contradicts m or M by
/// more than a relative 1e-9. Throws DegenerateSample if every pair
/// coincides.
[[nodiscard]] ConstantsCheck verify_constants(const OperatorSpec& op, int sample_count, double radius,
                                              std::uint64_t seed);

}  // namespace degsweep::ops
