#pragma once

#include <numbers>

namespace optocorr::constants {

// Exact SI values (2019 redefinition).
inline constexpr double h = 6.62607015e-34;       // J s
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double k_B = 1.380649e-23;       // J/K
inline constexpr double c = 299792458.0;          // m/s

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace optocorr::constants
