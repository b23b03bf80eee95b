#pragma once

namespace collapse {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace collapse
