#pragma once

namespace recoverbench {

inline constexpr const char* kVersionString = "0.1.0";

} // namespace recoverbench
