#pragma once

namespace voxsurf {
inline constexpr const char* kVersion = "0.3.0";
}
