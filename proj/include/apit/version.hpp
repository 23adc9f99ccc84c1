#pragma once

namespace apit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace apit
