#pragma once

namespace uncnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace uncnet
