#pragma once

namespace hmg {

inline constexpr const char* kVersion = "hmg 0.1.0";

}  // namespace hmg
