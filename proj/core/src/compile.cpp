#include <functional>
#include <set>
#include <string>

#include "sppl/ast.hpp"
#include "sppl/diagnostics.hpp"
#include "sppl/graph.hpp"
#include "sppl/util.hpp"

namespace sppl {

const Vertex* GraphModel::find_vertex(const std::string& name) const {
  for (const auto& v : vertices) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const Predicate* GraphModel::find_predicate(const std::string& id) const {
  for (const auto& p : predicates) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

int GraphModel::predicate_index(const std::string& id) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> GraphModel::latent_names() const {
  std::vector<std::string> out;
  for (const auto& v : vertices) {
    if (v.kind == VertexKind::latent) out.push_back(v.name);
  }
  return out;
}

namespace {

struct Compiler {
  const std::map<std::string, double>& constants;
  GraphModel model;
  std::vector<GuardLiteral> guard_stack;
  std::map<std::string, int> counters;
  std::set<std::string> used;
  int next_pred = 1;

  using Env = std::map<std::string, SymPtr>;

  std::string fresh(const std::string& base) {
    int& k = counters[base];
    std::string name;
    do {
      name = base + std::to_string(++k);
    } while (!used.insert(name).second);
    return name;
  }

  // Free latent variables of a closed expression, looking through
  // conditionals into their predicates' variables: the value depends on
  // those through the branch decision.
  void free_vars(const SymPtr& e, std::set<std::string>& out) const {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, SymVar>) {
            out.insert(n.name);
          } else if constexpr (std::is_same_v<T, SymApp>) {
            for (const auto& a : n.args) free_vars(a, out);
          } else if constexpr (std::is_same_v<T, SymCond>) {
            const Predicate* p = model.find_predicate(n.pred);
            if (p) out.insert(p->free_vars.begin(), p->free_vars.end());
            free_vars(n.on_neg, out);
            free_vars(n.on_nonneg, out);
          }
        },
        e->node);
  }

  void add_vertex(Vertex v, const std::vector<SymPtr>& params) {
    std::set<std::string> parents;
    for (const auto& p : params) free_vars(p, parents);
    for (const auto& g : v.guard) {
      const Predicate* pred = model.find_predicate(g.pred);
      parents.insert(pred->free_vars.begin(), pred->free_vars.end());
    }
    for (const auto& parent : parents) model.arcs.emplace(parent, v.name);
    model.vertices.push_back(std::move(v));
  }

  SymPtr eval(const ast::ExprPtr& e, const Env& env, const std::string* hint) {
    return std::visit([&](const auto& n) { return eval_node(e, n, env, hint); },
                      e->node);
  }

  SymPtr eval_node(const ast::ExprPtr& e, const ast::Var& v, const Env& env,
                   const std::string*) {
    if (auto it = env.find(v.name); it != env.end()) return it->second;
    if (auto it = constants.find(v.name); it != constants.end()) {
      return sym_const(it->second);
    }
    throw SpplError("compile", "unbound variable '" + v.name + "'", e->span);
  }

  SymPtr eval_node(const ast::ExprPtr&, const ast::Const& c, const Env&,
                   const std::string*) {
    return sym_const(c.value);
  }

  SymPtr eval_node(const ast::ExprPtr&, const ast::PrimApp& p, const Env& env,
                   const std::string*) {
    std::vector<SymPtr> args;
    args.reserve(p.args.size());
    for (const auto& a : p.args) args.push_back(eval(a, env, nullptr));
    return sym_app(p.op, std::move(args));
  }

  SymPtr eval_node(const ast::ExprPtr& e, const ast::If& i, const Env& env,
                   const std::string* hint) {
    if (ast::count_stochastic(i.guard) > 0) {
      throw SpplError("compile", "sample/observe is not allowed inside an if guard",
                      i.guard->span);
    }
    const SymPtr g = eval(i.guard, env, nullptr);
    std::set<std::string> fv;
    free_vars(g, fv);
    if (fv.empty()) {
      // The branch decision is known now; fold it and record that a branch
      // never executes.  (Guards never contain conditionals without free
      // variables, so plain evaluation cannot hit a predicate here.)
      const double value = sym_eval(
          g, [&](const std::string& name) -> double {
            throw SpplError("compile", "unbound variable '" + name + "'", e->span);
          },
          [&](const std::string&) -> bool {
            throw SpplError("compile", "conditional in constant guard", e->span);
          });
      std::string where = e->span.known()
                              ? "line " + std::to_string(e->span.line) + ", column " +
                                    std::to_string(e->span.col)
                              : "an if with no source location";
      model.warnings.push_back("constant guard (" + format_double(value) + ") at " +
                               where + "; the unreached branch is dropped");
      return eval(value < 0.0 ? i.then_branch : i.else_branch, env, hint);
    }

    const std::string id = "φ" + std::to_string(next_pred++);
    model.predicates.push_back(
        Predicate{id, g, std::vector<std::string>(fv.begin(), fv.end())});

    guard_stack.push_back({id, Polarity::neg});
    const SymPtr on_neg = eval(i.then_branch, env, nullptr);
    guard_stack.back().polarity = Polarity::nonneg;
    const SymPtr on_nonneg = eval(i.else_branch, env, nullptr);
    guard_stack.pop_back();
    return sym_cond(id, on_neg, on_nonneg);
  }

  SymPtr eval_node(const ast::ExprPtr&, const ast::Let& l, const Env& env,
                   const std::string* hint) {
    const SymPtr bound = eval(l.bound, env, &l.binder);
    Env inner = env;
    inner[l.binder] = bound;
    // The body's value is what the surrounding context binds, so an outer
    // binder name still applies to a sample in tail position.
    return eval(l.body, inner, hint);
  }

  SymPtr eval_node(const ast::ExprPtr& e, const ast::Sample& s, const Env& env,
                   const std::string* hint) {
    std::vector<SymPtr> params;
    params.reserve(s.dist.params.size());
    for (const auto& p : s.dist.params) params.push_back(eval(p, env, nullptr));
    Vertex v;
    v.name = fresh(hint ? *hint : "x");
    v.kind = VertexKind::latent;
    v.dist = DistSpec{s.dist.kind, params};
    v.guard = guard_stack;
    (void)e;
    const SymPtr value = sym_var(v.name);
    add_vertex(std::move(v), params);
    return value;
  }

  SymPtr eval_node(const ast::ExprPtr& e, const ast::Observe& o, const Env& env,
                   const std::string*) {
    std::vector<SymPtr> params;
    params.reserve(o.dist.params.size());
    for (const auto& p : o.dist.params) params.push_back(eval(p, env, nullptr));
    Vertex v;
    v.name = fresh("y");
    v.kind = VertexKind::observed;
    v.dist = DistSpec{o.dist.kind, params};
    v.datum = o.datum;
    v.guard = guard_stack;
    (void)e;
    add_vertex(std::move(v), params);
    return sym_const(o.datum);
  }
};

}  // namespace

GraphModel compile(const ast::ExprPtr& program,
                   const std::map<std::string, double>& constants) {
  Compiler c{constants};
  c.model.result = c.eval(program, {}, nullptr);
  c.model.coord_class = classify_coordinates(c.model);
  return std::move(c.model);
}

std::map<std::string, CoordClass> classify_coordinates(const GraphModel& model) {
  std::map<std::string, CoordClass> out;
  for (const auto& v : model.vertices) {
    if (v.kind == VertexKind::latent) out[v.name] = CoordClass::continuous;
  }
  for (const auto& p : model.predicates) {
    for (const auto& name : p.free_vars) {
      if (auto it = out.find(name); it != out.end()) {
        it->second = CoordClass::discontinuous;
      }
    }
  }
  return out;
}

double eval_sym(const GraphModel& model, const SymPtr& e,
                const std::map<std::string, double>& latents) {
  std::function<double(const SymPtr&)> go;
  const auto var = [&](const std::string& name) -> double {
    auto it = latents.find(name);
    if (it == latents.end()) {
      throw SpplError("eval", "no value for latent '" + name + "'");
    }
    return it->second;
  };
  const auto pred = [&](const std::string& id) -> bool {
    const Predicate* p = model.find_predicate(id);
    if (!p) throw SpplError("eval", "unknown predicate '" + id + "'");
    return go(p->expr) < 0.0;
  };
  go = [&](const SymPtr& ex) { return sym_eval(ex, var, pred); };
  return go(e);
}

double eval_result(const GraphModel& model,
                   const std::map<std::string, double>& latents) {
  if (!model.result) {
    throw SpplError("eval", "model carries no result expression");
  }
  return eval_sym(model, model.result, latents);
}

}  // namespace sppl
