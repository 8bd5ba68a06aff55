#pragma once

// Conversion factors from the units used in configs and reports to the SI
// units used internally (m, s, V, A, F).

namespace oectsim::units {

inline constexpr double kNm = 1e-9;          // nm -> m
inline constexpr double kUm = 1e-6;          // um -> m
inline constexpr double kCm2PerVs = 1e-4;    // cm^2/(V s) -> m^2/(V s)
inline constexpr double kFPerCm3 = 1e6;      // F/cm^3 -> F/m^3
inline constexpr double kMilli = 1e-3;       // mS -> S, mV -> V

}  // namespace oectsim::units
