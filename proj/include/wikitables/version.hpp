#pragma once

namespace wikitables {

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr int kCorpusFormatVersion = 1;

}  // namespace wikitables
