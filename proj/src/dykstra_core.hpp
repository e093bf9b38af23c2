#pragma once

#include <span>

#include "degsweep/set_zoo.hpp"

namespace degsweep::sets::detail {

/// Dykstra iterations without the emptiness pre-check; callers must know the
/// intersection is nonempty.
DykstraResult dykstra_unchecked(std::span<const HalfSpace> members, const Vec& z, double tol,
                                int max_iter);

/// Largest normalized violation max_i (<a_i,z> - b_i)/||a_i||.
double max_violation(std::span<const HalfSpace> faces, const Vec& z);

}  // namespace degsweep::sets::detail
