#pragma once

namespace sppl {

inline constexpr const char* kToolName = "sppl";
inline constexpr const char* kToolVersion = "0.1.0";

// Version of the run-manifest layout written next to sample output.
inline constexpr int kManifestVersion = 1;

}  // namespace sppl
