#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace sppl {

// Closed-form expressions over graph vertices.  These appear as distribution
// parameters, predicate guards, and the program result value after
// compilation: all lexical structure is gone, variables refer to vertex
// names, and data-dependent branching is an explicit conditional on a named
// predicate.

struct SymExpr;
using SymPtr = std::shared_ptr<const SymExpr>;

struct SymConst {
  double value = 0.0;
};

struct SymVar {
  std::string name;  // a latent vertex
};

struct SymApp {
  std::string op;  // +, -, *, /, exp, log, pow, identity
  std::vector<SymPtr> args;
};

// Value-level branch: `on_neg` when the named predicate's guard is < 0,
// `on_nonneg` otherwise (same tie rule as vertex guards).
struct SymCond {
  std::string pred;
  SymPtr on_neg;
  SymPtr on_nonneg;
};

struct SymExpr {
  std::variant<SymConst, SymVar, SymApp, SymCond> node;
};

SymPtr sym_const(double value);
SymPtr sym_var(std::string name);
SymPtr sym_app(std::string op, std::vector<SymPtr> args);
SymPtr sym_cond(std::string pred, SymPtr on_neg, SymPtr on_nonneg);

bool sym_equal(const SymPtr& a, const SymPtr& b);

// Canonical prefix rendering, e.g. (- x1 0.3); conditionals render as
// (if φ1 a b).
std::string sym_to_string(const SymPtr& e);

// Variables referenced directly by `e` (not through predicate bodies of
// conditionals); sorted, deduplicated.
std::vector<std::string> sym_direct_vars(const SymPtr& e);

// Numeric evaluation.  `var` resolves variables, `pred` decides conditionals
// (true means the predicate's guard is < 0).  Unknown variables throw.
double sym_eval(const SymPtr& e,
                const std::function<double(const std::string&)>& var,
                const std::function<bool(const std::string&)>& pred);

// Applies one primitive to already-evaluated arguments; shared by the
// interpreter above and the expression-program builder.
double apply_prim(const std::string& op, const std::vector<double>& args);

}  // namespace sppl
