#include "sppl/validate.hpp"

#include <set>
#include <string>

#include "sppl/diagnostics.hpp"

namespace sppl {
namespace {

using namespace ast;

[[noreturn]] void fail(const SourceSpan& span, const std::string& msg) {
  throw SpplError("validate", msg, span);
}

bool comparison(const std::string& op) {
  return op == "<" || op == ">" || op == "<=" || op == ">=";
}

bool is_const_zero(const ExprPtr& e) {
  const auto* c = std::get_if<Const>(&e->node);
  return c && c->value == 0.0;
}

struct Checker {
  const std::map<std::string, double>& constants;
  std::set<std::string> scope;

  void check(const ExprPtr& e) {
    std::visit([&](const auto& n) { check_node(e, n); }, e->node);
  }

  void check_node(const ExprPtr& e, const Var& v) {
    if (!scope.count(v.name) && !constants.count(v.name)) {
      fail(e->span, "unbound variable '" + v.name + "'");
    }
  }

  void check_node(const ExprPtr&, const Const&) {}

  void check_node(const ExprPtr& e, const PrimApp& p) {
    const std::size_t n = p.args.size();
    if (comparison(p.op)) {
      fail(e->span, "comparison '" + p.op + "' is only allowed in an if guard");
    } else if (p.op == "+" || p.op == "*") {
      if (n < 2) fail(e->span, "'" + p.op + "' expects at least 2 arguments");
    } else if (p.op == "-") {
      if (n < 1 || n > 2) fail(e->span, "'-' expects 1 or 2 arguments");
    } else if (p.op == "/") {
      if (n != 2) fail(e->span, "'/' expects 2 arguments");
      if (is_const_zero(p.args[1])) fail(p.args[1]->span, "division by constant zero");
    } else if (p.op == "exp" || p.op == "identity") {
      if (n != 1) fail(e->span, "'" + p.op + "' expects 1 argument");
    } else if (p.op == "log") {
      if (n != 1) fail(e->span, "'log' expects 1 argument");
      if (is_const_zero(p.args[0])) fail(p.args[0]->span, "log of constant zero");
    } else if (p.op == "pow") {
      if (n != 2) fail(e->span, "'pow' expects 2 arguments");
      if (!std::holds_alternative<Const>(p.args[1]->node)) {
        fail(p.args[1]->span, "pow exponent must be a numeric constant");
      }
    } else {
      fail(e->span, "unknown primitive '" + p.op + "'");
    }
    for (const auto& a : p.args) check(a);
  }

  void check_node(const ExprPtr&, const If& i) {
    check(i.guard);
    check(i.then_branch);
    check(i.else_branch);
  }

  void check_node(const ExprPtr&, const Let& l) {
    check(l.bound);
    const bool fresh = scope.insert(l.binder).second;
    check(l.body);
    if (fresh) scope.erase(l.binder);  // shadowing restores the outer binding
  }

  void check_dist(const ExprPtr& e, const DistExpr& d) {
    if (d.kind != "normal" && d.kind != "uniform") {
      fail(d.span.known() ? d.span : e->span, "unknown distribution '" + d.kind + "'");
    }
    if (d.params.size() != 2) {
      fail(d.span.known() ? d.span : e->span,
           "'" + d.kind + "' expects 2 parameters, got " +
               std::to_string(d.params.size()));
    }
    for (const auto& p : d.params) check(p);
  }

  void check_node(const ExprPtr& e, const Sample& s) { check_dist(e, s.dist); }
  void check_node(const ExprPtr& e, const Observe& o) { check_dist(e, o.dist); }
};

}  // namespace

const ast::ExprPtr& validate(const ast::ExprPtr& program,
                             const std::map<std::string, double>& constants) {
  Checker checker{constants, {}};
  checker.check(program);
  return program;
}

}  // namespace sppl
