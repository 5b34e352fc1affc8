#pragma once

namespace tlsnl {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace tlsnl
