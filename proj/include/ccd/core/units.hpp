#pragma once

#include <numbers>

namespace ccd {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Configuration frequencies are cyclic MHz; Hamiltonian coefficients are rad/us.
constexpr double angular_from_mhz(double f_mhz) { return kTwoPi * f_mhz; }
constexpr double mhz_from_angular(double w) { return w / kTwoPi; }

}  // namespace ccd
