#pragma once

#include <map>
#include <string>

#include "sppl/ast.hpp"

namespace sppl {

// Static checks beyond grammar shape: every variable is bound (lexically or
// by a model-level constant), primitive ops come from the fixed whitelist
// with correct arity, `pow` exponents are literal constants, distribution
// kinds are known with the right parameter count, and syntactically-zero
// divisors / log arguments are rejected.  Returns its argument unchanged on
// success; throws SpplError(kind="validate") with a span otherwise.
const ast::ExprPtr& validate(const ast::ExprPtr& program,
                             const std::map<std::string, double>& constants = {});

}  // namespace sppl
