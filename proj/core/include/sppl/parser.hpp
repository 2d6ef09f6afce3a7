#pragma once

#include <string_view>

#include "sppl/ast.hpp"

namespace sppl {

// Parses one program (a single top-level expression) from source text.
// Comments run from ';' to end of line.  Throws SpplError(kind="parse") with
// the offending span on malformed input, including shape violations of the
// special forms (let/if/sample/observe) and reserved-word misuse.
ast::ExprPtr parse(std::string_view source);

}  // namespace sppl
