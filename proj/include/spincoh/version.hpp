#pragma once

namespace spincoh {

inline constexpr const char* version = "0.1.0";

}  // namespace spincoh
