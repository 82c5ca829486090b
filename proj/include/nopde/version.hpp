#pragma once

namespace nopde {

inline constexpr const char* kVersion = "0.1.0";

} // namespace nopde
