#pragma once

namespace treediff {

inline constexpr const char* library_version = "0.1.0";

}
