// version.hpp - Artifact and CSV schema versions.

#pragma once

namespace qtm {

inline constexpr const char* version = "1.0.0";
inline constexpr int csv_schema = 1;

} // namespace qtm
