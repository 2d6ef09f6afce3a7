#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sppl/ast.hpp"
#include "sppl/sym.hpp"

namespace sppl {

enum class VertexKind { latent, observed };
enum class Polarity { neg, nonneg };
enum class CoordClass { continuous, discontinuous };

struct GuardLiteral {
  std::string pred;   // predicate id, e.g. "φ1"
  Polarity polarity;  // branch this vertex lives on
};

struct DistSpec {
  std::string kind;            // "normal" | "uniform"
  std::vector<SymPtr> params;  // closed expressions over earlier vertices
};

struct Vertex {
  std::string name;
  VertexKind kind = VertexKind::latent;
  DistSpec dist;
  std::optional<double> datum;       // observed vertices only
  std::vector<GuardLiteral> guard;   // conjunction; empty = unconditional
};

struct Predicate {
  std::string id;
  SymPtr expr;                        // the guard; tested against < 0
  std::vector<std::string> free_vars; // latent vertices it reads, sorted
};

// The compiled model: a static graph with one vertex per stochastic form.
// `result` (the program's value expression) and `warnings` are compile
// byproducts and are not part of the serialized exchange format.
struct GraphModel {
  std::vector<Vertex> vertices;  // program order
  std::set<std::pair<std::string, std::string>> arcs;  // (parent, child)
  std::vector<Predicate> predicates;  // φ1, φ2, ... in creation order
  std::map<std::string, CoordClass> coord_class;  // latent vertices only
  SymPtr result;
  std::vector<std::string> warnings;

  const Vertex* find_vertex(const std::string& name) const;
  const Predicate* find_predicate(const std::string& id) const;
  int predicate_index(const std::string& id) const;  // -1 if absent
  std::vector<std::string> latent_names() const;     // vertex order
};

// Turns a validated program into its graph.  `constants` supplies model-level
// named constants (already honored by validate).  Throws
// SpplError(kind="compile") on stochastic forms inside guard expressions.
GraphModel compile(const ast::ExprPtr& program,
                   const std::map<std::string, double>& constants = {});

// Rebuilds the latent classification from the predicate table: a latent
// coordinate is discontinuous iff some predicate reads it.  `compile` already
// leaves this in place; exposed separately for ingested graphs and tests.
std::map<std::string, CoordClass> classify_coordinates(const GraphModel& model);

// Evaluates a closed expression against a full latent assignment, resolving
// conditionals by evaluating the named predicates' guards.  Shared by the
// reference density path, ancestral initialization, and result reporting.
double eval_sym(const GraphModel& model, const SymPtr& e,
                const std::map<std::string, double>& latents);

// Convenience: evaluates `model.result` at a latent assignment.
double eval_result(const GraphModel& model,
                   const std::map<std::string, double>& latents);

}  // namespace sppl
