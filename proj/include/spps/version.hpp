#pragma once

namespace spps {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace spps
