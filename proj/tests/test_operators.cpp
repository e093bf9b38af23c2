#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "degsweep/operators.hpp"
#include "support.hpp"

using namespace degsweep;
using namespace degsweep::ops;
using testsupport::v;

namespace {

// Q diag(d) Q^T with Q from a product of plane rotations: eigenvalues known
// by construction.
Mat spd_with_spectrum(const Vec& d, std::mt19937_64& rng) {
    const Eigen::Index n = d.size();
    Mat q = Mat::Identity(n, n);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = angle(rng);
            Mat g = Mat::Identity(n, n);
            g(i, i) = std::cos(a);
            g(j, j) = std::cos(a);
            g(i, j) = -std::sin(a);
            g(j, i) = std::sin(a);
            q = q * g;
        }
    }
    Mat out = q * d.asDiagonal() * q.transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace

TEST_CASE("apply examples") {
    CHECK(OperatorSpec::identity(2).apply(v({1.0, 2.0})) == v({1.0, 2.0}));
    CHECK(OperatorSpec::scaled_identity(2, 2.0).apply(v({1.0, 0.0})) == v({2.0, 0.0}));
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 4.0;
    CHECK(OperatorSpec::linear_spd(d).apply(v({1.0, 1.0})) == v({1.0, 4.0}));
    CHECK_THROWS_AS((void)OperatorSpec::identity(2).apply(v({1.0})), DimensionMismatch);
}

TEST_CASE("scaled identity is homogeneous") {
    const auto op = OperatorSpec::scaled_identity(3, 2.5);
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const Vec x = testsupport::random_vec(rng, 3, 2.0);
        const double c = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        CHECK((op.apply(c * x) - c * op.apply(x)).norm() <= 1e-14 * (1.0 + x.norm()));
    }
    CHECK(op.scalar_multiple() == 2.5);
    CHECK(OperatorSpec::identity(3).scalar_multiple() == 1.0);
}

TEST_CASE("constants of the three variants") {
    const auto id = OperatorSpec::identity(2);
    CHECK(id.m() == 1.0);
    CHECK(id.M() == 1.0);
    const auto s = OperatorSpec::scaled_identity(2, 2.0);
    CHECK(s.m() == 2.0);
    CHECK(s.M() == 2.0);
    CHECK_THROWS_AS((void)OperatorSpec::scaled_identity(2, 0.0), InvalidOperator);
    CHECK_THROWS_AS((void)OperatorSpec::scaled_identity(2, -1.0), InvalidOperator);
}

TEST_CASE("linear SPD constants are the extreme eigenvalues") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 20; ++k) {
        const Eigen::Index n = 2 + k % 4;
        Vec d(n);
        for (Eigen::Index i = 0; i < n; ++i) d[i] = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
        const auto op = OperatorSpec::linear_spd(spd_with_spectrum(d, rng));
        CHECK(op.m() == doctest::Approx(d.minCoeff()).epsilon(1e-12));
        CHECK(op.M() == doctest::Approx(d.maxCoeff()).epsilon(1e-12));
        CHECK_FALSE(op.constants_adjusted());
        CHECK_FALSE(op.scalar_multiple().has_value());
    }
}

TEST_CASE("declared constants inconsistent with the spectrum are overridden") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 4.0;
    const auto wrong = OperatorSpec::linear_spd(d, 2.0, 3.0);
    CHECK(wrong.m() == doctest::Approx(1.0));
    CHECK(wrong.M() == doctest::Approx(4.0));
    CHECK(wrong.constants_adjusted());

    const auto conservative = OperatorSpec::linear_spd(d, 0.5, 5.0);
    CHECK(conservative.m() == 0.5);
    CHECK(conservative.M() == 5.0);
    CHECK_FALSE(conservative.constants_adjusted());
}

TEST_CASE("non-SPD matrices are rejected") {
    Mat asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS((void)OperatorSpec::linear_spd(asym), InvalidOperator);
    Mat indefinite(2, 2);
    indefinite << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS((void)OperatorSpec::linear_spd(indefinite), InvalidOperator);
    Mat singular = Mat::Zero(2, 2);
    singular(0, 0) = 1.0;
    CHECK_THROWS_AS((void)OperatorSpec::linear_spd(singular), InvalidOperator);
    CHECK_THROWS_AS((void)OperatorSpec::linear_spd(Mat::Identity(2, 3)), InvalidOperator);
}

TEST_CASE("verify_constants on homotheties is exact") {
    const auto c = verify_constants(OperatorSpec::scaled_identity(3, 2.0), 64, 1.0, 1);
    CHECK(c.m_hat == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.M_hat == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.ok);
    const auto i = verify_constants(OperatorSpec::identity(2), 64, 1.0, 1);
    CHECK(i.m_hat == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(i.M_hat == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("verify_constants brackets and approaches the spectrum of diag(1,4)") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 4.0;
    const auto op = OperatorSpec::linear_spd(d);
    double prev_gap = kInf;
    for (int count : {16, 256, 8192}) {
        const auto c = verify_constants(op, count, 2.0, 3);
        CHECK(c.ok);
        CHECK(c.m_hat >= 1.0 - 1e-9);
        CHECK(c.M_hat <= 4.0 + 1e-9);
        const double gap = (c.m_hat - 1.0) + (4.0 - c.M_hat);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-3);
}

TEST_CASE("verify_constants rejects too few or coincident samples") {
    CHECK_THROWS_AS((void)verify_constants(OperatorSpec::identity(2), 1, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)verify_constants(OperatorSpec::identity(2), 10, 0.0, 0), DegenerateSample);
}
