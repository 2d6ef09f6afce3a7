#include "sppl/ast.hpp"

#include <sstream>

#include "sppl/util.hpp"

namespace sppl::ast {

ExprPtr make_var(std::string name, SourceSpan span) {
  return std::make_shared<Expr>(Expr{Var{std::move(name)}, span});
}

ExprPtr make_const(double value, SourceSpan span) {
  return std::make_shared<Expr>(Expr{Const{value}, span});
}

ExprPtr make_prim(std::string op, std::vector<ExprPtr> args, SourceSpan span) {
  return std::make_shared<Expr>(Expr{PrimApp{std::move(op), std::move(args)}, span});
}

ExprPtr make_if(ExprPtr guard, ExprPtr then_branch, ExprPtr else_branch,
                SourceSpan span) {
  return std::make_shared<Expr>(
      Expr{If{std::move(guard), std::move(then_branch), std::move(else_branch)}, span});
}

ExprPtr make_let(std::string binder, ExprPtr bound, ExprPtr body, SourceSpan span) {
  return std::make_shared<Expr>(
      Expr{Let{std::move(binder), std::move(bound), std::move(body)}, span});
}

ExprPtr make_sample(DistExpr dist, SourceSpan span) {
  return std::make_shared<Expr>(Expr{Sample{std::move(dist)}, span});
}

ExprPtr make_observe(DistExpr dist, double datum, SourceSpan span) {
  return std::make_shared<Expr>(Expr{Observe{std::move(dist), datum}, span});
}

namespace {

bool dist_equal(const DistExpr& a, const DistExpr& b) {
  if (a.kind != b.kind || a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (!equal(a.params[i], b.params[i])) return false;
  }
  return true;
}

}  // namespace

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* va = std::get_if<Var>(&a.node)) {
    return va->name == std::get<Var>(b.node).name;
  }
  if (const auto* ca = std::get_if<Const>(&a.node)) {
    return ca->value == std::get<Const>(b.node).value;
  }
  if (const auto* pa = std::get_if<PrimApp>(&a.node)) {
    const auto& pb = std::get<PrimApp>(b.node);
    if (pa->op != pb.op || pa->args.size() != pb.args.size()) return false;
    for (std::size_t i = 0; i < pa->args.size(); ++i) {
      if (!equal(pa->args[i], pb.args[i])) return false;
    }
    return true;
  }
  if (const auto* ia = std::get_if<If>(&a.node)) {
    const auto& ib = std::get<If>(b.node);
    return equal(ia->guard, ib.guard) && equal(ia->then_branch, ib.then_branch) &&
           equal(ia->else_branch, ib.else_branch);
  }
  if (const auto* la = std::get_if<Let>(&a.node)) {
    const auto& lb = std::get<Let>(b.node);
    return la->binder == lb.binder && equal(la->bound, lb.bound) &&
           equal(la->body, lb.body);
  }
  if (const auto* sa = std::get_if<Sample>(&a.node)) {
    return dist_equal(sa->dist, std::get<Sample>(b.node).dist);
  }
  const auto& oa = std::get<Observe>(a.node);
  const auto& ob = std::get<Observe>(b.node);
  return oa.datum == ob.datum && dist_equal(oa.dist, ob.dist);
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return equal(*a, *b);
}

namespace {

void print(std::ostream& os, const Expr& e);

void print_dist(std::ostream& os, const DistExpr& d) {
  os << '(' << d.kind;
  for (const auto& p : d.params) {
    os << ' ';
    print(os, *p);
  }
  os << ')';
}

void print(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, Const>) {
          os << format_double(n.value);
        } else if constexpr (std::is_same_v<T, PrimApp>) {
          os << '(' << n.op;
          for (const auto& a : n.args) {
            os << ' ';
            print(os, *a);
          }
          os << ')';
        } else if constexpr (std::is_same_v<T, If>) {
          os << "(if (< ";
          print(os, *n.guard);
          os << " 0) ";
          print(os, *n.then_branch);
          os << ' ';
          print(os, *n.else_branch);
          os << ')';
        } else if constexpr (std::is_same_v<T, Let>) {
          os << "(let [" << n.binder << ' ';
          print(os, *n.bound);
          os << "] ";
          print(os, *n.body);
          os << ')';
        } else if constexpr (std::is_same_v<T, Sample>) {
          os << "(sample ";
          print_dist(os, n.dist);
          os << ')';
        } else {
          os << "(observe ";
          print_dist(os, n.dist);
          os << ' ' << format_double(n.datum) << ')';
        }
      },
      e.node);
}

}  // namespace

std::string pretty_print(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

std::string pretty_print(const ExprPtr& e) { return pretty_print(*e); }

int count_stochastic(const ExprPtr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var> || std::is_same_v<T, Const>) {
          return 0;
        } else if constexpr (std::is_same_v<T, PrimApp>) {
          int c = 0;
          for (const auto& a : n.args) c += count_stochastic(a);
          return c;
        } else if constexpr (std::is_same_v<T, If>) {
          return count_stochastic(n.guard) + count_stochastic(n.then_branch) +
                 count_stochastic(n.else_branch);
        } else if constexpr (std::is_same_v<T, Let>) {
          return count_stochastic(n.bound) + count_stochastic(n.body);
        } else if constexpr (std::is_same_v<T, Sample>) {
          int c = 1;
          for (const auto& p : n.dist.params) c += count_stochastic(p);
          return c;
        } else {
          int c = 1;
          for (const auto& p : n.dist.params) c += count_stochastic(p);
          return c;
        }
      },
      e->node);
}

}  // namespace sppl::ast
