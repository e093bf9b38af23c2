#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace degsweep {

/// Point of the state space R^n.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ── Errors ───────────────────────────────────────────────────────────────────

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Non-finite input reached the numerical core.
class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// A set description that cannot describe a closed nonempty set family
/// (negative radius, non-unit normal, ...).
class InvalidSetSpec : public Error {
public:
    using Error::Error;
};

class EmptyInstance : public Error {
public:
    using Error::Error;
};

class ProjectionNotConverged : public Error {
public:
    using Error::Error;
};

class EmptyCandidates : public Error {
public:
    using Error::Error;
};

class InvalidOperator : public Error {
public:
    using Error::Error;
};

class DegenerateSample : public Error {
public:
    using Error::Error;
};

class StepFailure : public Error {
public:
    using Error::Error;
};

class UnsupportedScenario : public Error {
public:
    using Error::Error;
};

class TubeSamplingFailed : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed scenario document. The message carries the line/column or the
/// JSON pointer of the offending field.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A well-formed scenario that violates one of the standing hypotheses.
/// `hypothesis()` is one of "H_A1", "H_A2", "H1", "H2", "feasibility",
/// "penalty-gate", "set", "problem".
class ValidationError : public Error {
public:
    ValidationError(std::string hypothesis, const std::string& detail)
        : Error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}

    [[nodiscard]] const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
    std::string hypothesis_;
};

// ── Small vector helpers ─────────────────────────────────────────────────────

void require_finite(const Vec& v, std::string_view what);
void require_dim(const Vec& v, Eigen::Index n, std::string_view what);

/// Strict lexicographic order on coordinate vectors of equal size.
[[nodiscard]] bool lex_less(const Vec& a, const Vec& b);

/// 64-bit FNV-1a; stable across platforms, used for scenario fingerprints.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace degsweep
