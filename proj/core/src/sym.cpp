#include "sppl/sym.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sppl/diagnostics.hpp"
#include "sppl/util.hpp"

namespace sppl {

SymPtr sym_const(double value) {
  return std::make_shared<SymExpr>(SymExpr{SymConst{value}});
}

SymPtr sym_var(std::string name) {
  return std::make_shared<SymExpr>(SymExpr{SymVar{std::move(name)}});
}

SymPtr sym_app(std::string op, std::vector<SymPtr> args) {
  return std::make_shared<SymExpr>(SymExpr{SymApp{std::move(op), std::move(args)}});
}

SymPtr sym_cond(std::string pred, SymPtr on_neg, SymPtr on_nonneg) {
  return std::make_shared<SymExpr>(
      SymExpr{SymCond{std::move(pred), std::move(on_neg), std::move(on_nonneg)}});
}

bool sym_equal(const SymPtr& a, const SymPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->node.index() != b->node.index()) return false;
  if (const auto* ca = std::get_if<SymConst>(&a->node)) {
    return ca->value == std::get<SymConst>(b->node).value;
  }
  if (const auto* va = std::get_if<SymVar>(&a->node)) {
    return va->name == std::get<SymVar>(b->node).name;
  }
  if (const auto* pa = std::get_if<SymApp>(&a->node)) {
    const auto& pb = std::get<SymApp>(b->node);
    if (pa->op != pb.op || pa->args.size() != pb.args.size()) return false;
    for (std::size_t i = 0; i < pa->args.size(); ++i) {
      if (!sym_equal(pa->args[i], pb.args[i])) return false;
    }
    return true;
  }
  const auto& ka = std::get<SymCond>(a->node);
  const auto& kb = std::get<SymCond>(b->node);
  return ka.pred == kb.pred && sym_equal(ka.on_neg, kb.on_neg) &&
         sym_equal(ka.on_nonneg, kb.on_nonneg);
}

namespace {

void render(std::ostringstream& os, const SymPtr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SymConst>) {
          os << format_double(n.value);
        } else if constexpr (std::is_same_v<T, SymVar>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, SymApp>) {
          os << '(' << n.op;
          for (const auto& a : n.args) {
            os << ' ';
            render(os, a);
          }
          os << ')';
        } else {
          os << "(if " << n.pred << ' ';
          render(os, n.on_neg);
          os << ' ';
          render(os, n.on_nonneg);
          os << ')';
        }
      },
      e->node);
}

void collect_vars(const SymPtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SymVar>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, SymApp>) {
          for (const auto& a : n.args) collect_vars(a, out);
        } else if constexpr (std::is_same_v<T, SymCond>) {
          collect_vars(n.on_neg, out);
          collect_vars(n.on_nonneg, out);
        }
      },
      e->node);
}

}  // namespace

std::string sym_to_string(const SymPtr& e) {
  std::ostringstream os;
  render(os, e);
  return os.str();
}

std::vector<std::string> sym_direct_vars(const SymPtr& e) {
  std::set<std::string> s;
  collect_vars(e, s);
  return {s.begin(), s.end()};
}

double apply_prim(const std::string& op, const std::vector<double>& args) {
  if (op == "+") {
    double acc = 0.0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      acc = i == 0 ? args[0] : acc + args[i];
    }
    return acc;
  }
  if (op == "*") {
    double acc = 1.0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      acc = i == 0 ? args[0] : acc * args[i];
    }
    return acc;
  }
  if (op == "-") return args.size() == 1 ? -args[0] : args[0] - args[1];
  if (op == "/") return args[0] / args[1];
  if (op == "exp") return std::exp(args[0]);
  if (op == "log") return std::log(args[0]);
  if (op == "pow") return std::pow(args[0], args[1]);
  if (op == "identity") return args[0];
  throw SpplError("eval", "unknown primitive '" + op + "'");
}

double sym_eval(const SymPtr& e,
                const std::function<double(const std::string&)>& var,
                const std::function<bool(const std::string&)>& pred) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SymConst>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, SymVar>) {
          return var(n.name);
        } else if constexpr (std::is_same_v<T, SymApp>) {
          std::vector<double> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) args.push_back(sym_eval(a, var, pred));
          return apply_prim(n.op, args);
        } else {
          return sym_eval(pred(n.pred) ? n.on_neg : n.on_nonneg, var, pred);
        }
      },
      e->node);
}

}  // namespace sppl
