#pragma once

namespace fwm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fwm
