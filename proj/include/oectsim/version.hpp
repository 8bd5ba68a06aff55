#pragma once

namespace oectsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oectsim
