#pragma once

#include <numbers>

namespace nvgrad {

/// Vacuum permittivity (F/m).
inline constexpr double kEpsilon0 = 8.8541878128e-12;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace units {
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double mT = 1e-3;
/// 1 kV/cm in V/m.
inline constexpr double kV_per_cm = 1e5;
/// 1 Hz·cm/V in Hz·m/V.
inline constexpr double Hz_cm_per_V = 1e-2;
}  // namespace units

}  // namespace nvgrad
