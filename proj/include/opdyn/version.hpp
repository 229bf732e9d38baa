#pragma once

#include <string_view>

namespace opdyn {

inline constexpr std::string_view kToolName = "opdyn";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace opdyn
