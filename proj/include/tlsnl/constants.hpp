#pragma once

#include <limits>
#include <numbers>

namespace tlsnl {

inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace tlsnl
