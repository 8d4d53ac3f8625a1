#pragma once

namespace hsunmix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hsunmix
