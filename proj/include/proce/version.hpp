#pragma once

namespace proce {

inline constexpr const char* kVersion = "0.1.0";

// Format version stamped into every serialized artifact (models, bundles,
// reports). Readers reject anything newer than what they understand.
inline constexpr int kFormatVersion = 1;

}  // namespace proce
