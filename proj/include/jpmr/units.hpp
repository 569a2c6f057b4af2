#pragma once

#include <numbers>

namespace jpmr {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kPhi0 = 2.067833848e-15;      // Wb
inline constexpr double kReducedPhi0 = kPhi0 / kTwoPi;

inline constexpr double kNs = 1e-9;
inline constexpr double kUs = 1e-6;

// Angular frequency from a linear frequency in Hz.
constexpr double angular(double hz) { return kTwoPi * hz; }
// Linear frequency in Hz from an angular frequency.
constexpr double linear(double omega) { return omega / kTwoPi; }

}  // namespace jpmr
