#pragma once

namespace ptsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ptsim
