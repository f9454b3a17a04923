#pragma once

namespace fri {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace fri
