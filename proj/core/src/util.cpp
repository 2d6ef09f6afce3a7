#include "sppl/util.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "sppl/diagnostics.hpp"

namespace sppl {

std::string format_double(double v) {
  // to_chars without a precision argument emits the shortest representation
  // that round-trips; normalize -0 so equal values print identically.
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_diagnostic(std::string_view file, const SpplError& err) {
  std::string out(file);
  if (err.span().known()) {
    out += ':';
    out += std::to_string(err.span().line);
    out += ':';
    out += std::to_string(err.span().col);
  }
  out += ": ";
  out += err.what();
  return out;
}

}  // namespace sppl
