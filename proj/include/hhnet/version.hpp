#pragma once

namespace hhnet {
inline constexpr const char* version = "0.1.0";
}
