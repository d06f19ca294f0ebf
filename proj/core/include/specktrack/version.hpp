#pragma once

namespace specktrack {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace specktrack
