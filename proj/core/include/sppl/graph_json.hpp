#pragma once

#include <string>
#include <string_view>

#include "sppl/graph.hpp"

namespace sppl {

// Serializes the graph to the JSON exchange format: objects with sorted keys,
// two-space indent, expressions as prefix s-expressions in nested arrays.
// Emit → ingest → emit is byte-stable.
std::string emit_graph(const GraphModel& model);

// Parses the exchange format back into a GraphModel.  Structural problems
// (missing fields, unknown kinds, malformed expressions) throw
// SpplError(kind="graph-json").  The ingested model carries no result
// expression and no warnings.
GraphModel ingest_graph(std::string_view json_text);

// Equality on the serialized projection (vertices, arcs, predicates,
// classification) — exactly what emit_graph captures.
bool models_equal(const GraphModel& a, const GraphModel& b);

}  // namespace sppl
