#pragma once

namespace geomcmp {

inline constexpr const char* kToolName = "geomcmp";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace geomcmp
