#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sppl/diagnostics.hpp"

namespace sppl::ast {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Var {
  std::string name;
};

struct Const {
  double value = 0.0;
};

// Application of a deterministic primitive: (+ a b ...), (exp a), ...
struct PrimApp {
  std::string op;
  std::vector<ExprPtr> args;
};

// Branching is stored in one canonical shape: `guard < 0` selects
// `then_branch`, `guard >= 0` selects `else_branch`.  The parser desugars
// the surface comparisons (<, >, <=, >=) into this form; ties (guard exactly
// zero) therefore always take the else branch.
struct If {
  ExprPtr guard;
  ExprPtr then_branch;
  ExprPtr else_branch;
};

struct Let {
  std::string binder;
  ExprPtr bound;
  ExprPtr body;
};

struct DistExpr {
  std::string kind;  // "normal" | "uniform"
  std::vector<ExprPtr> params;
  SourceSpan span;
};

struct Sample {
  DistExpr dist;
};

struct Observe {
  DistExpr dist;
  double datum = 0.0;
};

struct Expr {
  std::variant<Var, Const, PrimApp, If, Let, Sample, Observe> node;
  SourceSpan span;
};

ExprPtr make_var(std::string name, SourceSpan span = {});
ExprPtr make_const(double value, SourceSpan span = {});
ExprPtr make_prim(std::string op, std::vector<ExprPtr> args, SourceSpan span = {});
ExprPtr make_if(ExprPtr guard, ExprPtr then_branch, ExprPtr else_branch,
                SourceSpan span = {});
ExprPtr make_let(std::string binder, ExprPtr bound, ExprPtr body,
                 SourceSpan span = {});
ExprPtr make_sample(DistExpr dist, SourceSpan span = {});
ExprPtr make_observe(DistExpr dist, double datum, SourceSpan span = {});

// Structural equality; spans are ignored.
bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);

// Emits the canonical (desugared) surface syntax.  Parsing the result yields
// a structurally equal tree.
std::string pretty_print(const Expr& e);
std::string pretty_print(const ExprPtr& e);

// Number of sample + observe forms in the tree.
int count_stochastic(const ExprPtr& e);

}  // namespace sppl::ast
