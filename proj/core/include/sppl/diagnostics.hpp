#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sppl {

// Half-open byte range [begin, end) into the source text, plus the 1-based
// line/column of `begin`.  A default-constructed span means "no location"
// (errors raised from API-built structures rather than parsed text).
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 0;
  int col = 0;

  bool known() const { return line > 0; }
};

// Every user-facing failure in the pipeline is thrown as one of these.
// `kind` is a stable machine-readable tag ("parse", "validate", "compile",
// ...); `what()` is the human-readable message without location prefix.
class SpplError : public std::runtime_error {
 public:
  SpplError(std::string kind, const std::string& message, SourceSpan span = {})
      : std::runtime_error(message), kind_(std::move(kind)), span_(span) {}

  const std::string& kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }

 private:
  std::string kind_;
  SourceSpan span_;
};

// "file:line:col: message" when the span is known, "file: message" otherwise.
std::string format_diagnostic(std::string_view file, const SpplError& err);

}  // namespace sppl
