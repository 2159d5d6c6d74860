#pragma once

namespace ocimix {

inline constexpr const char* kVersion = "ocimix 0.1.0";

// Serialization header for model checkpoints.
inline constexpr const char* kModelFormatTag = "ocimix-model-v1";

}  // namespace ocimix
