#include "sppl/graph_json.hpp"

#include <string>

#include "json.hpp"
#include "sppl/diagnostics.hpp"

namespace sppl {
namespace {

using nlohmann::json;

json sym_to_json(const SymPtr& e) {
  return std::visit(
      [&](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SymConst>) {
          return json(n.value);
        } else if constexpr (std::is_same_v<T, SymVar>) {
          return json(n.name);
        } else if constexpr (std::is_same_v<T, SymApp>) {
          json arr = json::array();
          arr.push_back(n.op);
          for (const auto& a : n.args) arr.push_back(sym_to_json(a));
          return arr;
        } else {
          return json::array(
              {"if", n.pred, sym_to_json(n.on_neg), sym_to_json(n.on_nonneg)});
        }
      },
      e->node);
}

[[noreturn]] void fail(const std::string& msg) {
  throw SpplError("graph-json", msg);
}

SymPtr sym_from_json(const json& j) {
  if (j.is_number()) return sym_const(j.get<double>());
  if (j.is_string()) return sym_var(j.get<std::string>());
  if (!j.is_array() || j.empty() || !j[0].is_string()) {
    fail("expression must be a number, a name, or a prefix array");
  }
  const std::string head = j[0].get<std::string>();
  if (head == "if") {
    if (j.size() != 4 || !j[1].is_string()) {
      fail("conditional expression must be [\"if\", predicate, a, b]");
    }
    return sym_cond(j[1].get<std::string>(), sym_from_json(j[2]), sym_from_json(j[3]));
  }
  std::vector<SymPtr> args;
  for (std::size_t i = 1; i < j.size(); ++i) args.push_back(sym_from_json(j[i]));
  return sym_app(head, std::move(args));
}

json model_to_json(const GraphModel& model) {
  json j;
  json vertices = json::array();
  for (const auto& v : model.vertices) {
    json jv;
    jv["name"] = v.name;
    jv["kind"] = v.kind == VertexKind::latent ? "latent" : "observed";
    json dist;
    dist["kind"] = v.dist.kind;
    json params = json::array();
    for (const auto& p : v.dist.params) params.push_back(sym_to_json(p));
    dist["params"] = params;
    jv["dist"] = dist;
    if (v.datum) jv["datum"] = *v.datum;
    json guard = json::array();
    for (const auto& g : v.guard) {
      guard.push_back(json::array(
          {g.pred, g.polarity == Polarity::neg ? "neg" : "nonneg"}));
    }
    jv["guard"] = guard;
    vertices.push_back(jv);
  }
  j["vertices"] = vertices;

  json arcs = json::array();
  for (const auto& [a, b] : model.arcs) arcs.push_back(json::array({a, b}));
  j["arcs"] = arcs;

  json preds = json::array();
  for (const auto& p : model.predicates) {
    json jp;
    jp["id"] = p.id;
    jp["expr"] = sym_to_json(p.expr);
    jp["free_vars"] = p.free_vars;
    preds.push_back(jp);
  }
  j["predicates"] = preds;

  json cc = json::object();
  for (const auto& [name, cls] : model.coord_class) {
    cc[name] = cls == CoordClass::continuous ? "continuous" : "discontinuous";
  }
  j["coord_class"] = cc;
  return j;
}

}  // namespace

std::string emit_graph(const GraphModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

GraphModel ingest_graph(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("vertices") || !j.contains("arcs") ||
      !j.contains("predicates") || !j.contains("coord_class")) {
    fail("graph object needs vertices, arcs, predicates, and coord_class");
  }

  GraphModel m;
  for (const auto& jv : j["vertices"]) {
    if (!jv.contains("name") || !jv.contains("kind") || !jv.contains("dist")) {
      fail("vertex needs name, kind, and dist");
    }
    Vertex v;
    v.name = jv["name"].get<std::string>();
    const std::string kind = jv["kind"].get<std::string>();
    if (kind == "latent") {
      v.kind = VertexKind::latent;
    } else if (kind == "observed") {
      v.kind = VertexKind::observed;
    } else {
      fail("unknown vertex kind '" + kind + "'");
    }
    const auto& dist = jv["dist"];
    if (!dist.contains("kind") || !dist.contains("params")) {
      fail("dist needs kind and params");
    }
    v.dist.kind = dist["kind"].get<std::string>();
    if (v.dist.kind != "normal" && v.dist.kind != "uniform") {
      fail("unknown distribution '" + v.dist.kind + "'");
    }
    for (const auto& p : dist["params"]) v.dist.params.push_back(sym_from_json(p));
    if (jv.contains("datum")) {
      v.datum = jv["datum"].get<double>();
    } else if (v.kind == VertexKind::observed) {
      fail("observed vertex '" + v.name + "' has no datum");
    }
    if (jv.contains("guard")) {
      for (const auto& g : jv["guard"]) {
        if (!g.is_array() || g.size() != 2) fail("guard entry must be [id, polarity]");
        const std::string pol = g[1].get<std::string>();
        if (pol != "neg" && pol != "nonneg") fail("guard polarity must be neg or nonneg");
        v.guard.push_back(GuardLiteral{
            g[0].get<std::string>(), pol == "neg" ? Polarity::neg : Polarity::nonneg});
      }
    }
    m.vertices.push_back(std::move(v));
  }

  for (const auto& ja : j["arcs"]) {
    if (!ja.is_array() || ja.size() != 2) fail("arc must be [parent, child]");
    m.arcs.emplace(ja[0].get<std::string>(), ja[1].get<std::string>());
  }

  for (const auto& jp : j["predicates"]) {
    if (!jp.contains("id") || !jp.contains("expr") || !jp.contains("free_vars")) {
      fail("predicate needs id, expr, and free_vars");
    }
    Predicate p;
    p.id = jp["id"].get<std::string>();
    p.expr = sym_from_json(jp["expr"]);
    for (const auto& v : jp["free_vars"]) p.free_vars.push_back(v.get<std::string>());
    m.predicates.push_back(std::move(p));
  }

  for (const auto& [name, cls] : j["coord_class"].items()) {
    const std::string c = cls.get<std::string>();
    if (c != "continuous" && c != "discontinuous") {
      fail("coordinate class must be continuous or discontinuous");
    }
    m.coord_class[name] =
        c == "continuous" ? CoordClass::continuous : CoordClass::discontinuous;
  }

  // Referential integrity: guards and free_vars must resolve.
  for (const auto& v : m.vertices) {
    for (const auto& g : v.guard) {
      if (!m.find_predicate(g.pred)) {
        fail("vertex '" + v.name + "' references unknown predicate '" + g.pred + "'");
      }
    }
  }
  return m;
}

bool models_equal(const GraphModel& a, const GraphModel& b) {
  return emit_graph(a) == emit_graph(b);
}

}  // namespace sppl
