#pragma once

namespace fhr {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace fhr
