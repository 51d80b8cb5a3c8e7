#pragma once

namespace rfim {
inline constexpr const char* kCodeVersion = "0.1.0";
}
