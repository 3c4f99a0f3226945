#pragma once

namespace otcut {

inline constexpr const char* kVersion = "0.1.0";

} // namespace otcut
