#pragma once

namespace annocheck {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace annocheck
