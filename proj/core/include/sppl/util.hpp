#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sppl {

// Shortest decimal string that parses back to exactly the same double.
// Used everywhere a floating value is written to text (CSV, pretty-printed
// programs, manifests) so that emit/ingest round-trips are lossless.
std::string format_double(double v);

// FNV-1a, 64-bit.  Stable across platforms; used to fingerprint serialized
// graphs in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace sppl
