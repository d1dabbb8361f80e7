#pragma once

namespace rimlab {

inline constexpr char kToolName[] = "rimlab";
inline constexpr char kVersion[] = "0.1.0";

}  // namespace rimlab
