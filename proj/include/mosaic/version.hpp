#pragma once

namespace mosaic {

inline constexpr const char* k_version = "0.1.0";
inline constexpr int k_manifest_schema = 1;

}  // namespace mosaic
