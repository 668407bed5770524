#pragma once

namespace autobayes {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace autobayes
