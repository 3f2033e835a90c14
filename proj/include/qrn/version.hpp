#pragma once

namespace qrn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qrn
