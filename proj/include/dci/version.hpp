#pragma once

namespace dci {

inline constexpr const char* kToolName = "dci";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace dci
