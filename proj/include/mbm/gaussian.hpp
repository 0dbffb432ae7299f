#pragma once

#include <cmath>
#include <numbers>

namespace mbm {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

/// Standard normal partial expectation E[Y 1{Y > a}], which equals the
/// standard normal density at a.
inline double phi(double a) { return kInvSqrt2Pi * std::exp(-0.5 * a * a); }

/// P(Y > a) for standard normal Y.
inline double normal_upper_tail(double a) { return 0.5 * std::erfc(a / std::numbers::sqrt2); }

}  // namespace mbm
