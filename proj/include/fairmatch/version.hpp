#pragma once

namespace fairmatch {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fairmatch
