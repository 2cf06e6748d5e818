#pragma once

namespace fmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fmc
