#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sppl/density.hpp"
#include "sppl/graph.hpp"

namespace sppl {

// One boolean per predicate, in predicate-table order: bit i is set iff
// guard_i(state) < 0.  A snapshot fully identifies the partition cell the
// state lies in.
struct PredicateSnapshot {
  std::vector<std::uint8_t> bits;

  bool operator==(const PredicateSnapshot&) const = default;
};

// Reference path: evaluates guards through the symbolic interpreter.
PredicateSnapshot snapshot(const GraphModel& model,
                           const std::map<std::string, double>& state);

// Fast path used inside samplers: evaluates the compiled guard programs.
// `state` is in pd.coords() order.
PredicateSnapshot snapshot(const PiecewiseDensity& pd,
                           std::span<const double> state);

// Indices of predicates whose sign differs between the two snapshots —
// exactly the boundaries crossed by the move, however it was produced.
// Throws SpplError(kind="boundary") on size mismatch.
std::vector<std::uint32_t> detect_crossing(const PredicateSnapshot& before,
                                           const PredicateSnapshot& after);

// Same, rendered as predicate ids via the model's table.
std::vector<std::string> detect_crossing(const PredicateSnapshot& before,
                                         const PredicateSnapshot& after,
                                         const GraphModel& model);

}  // namespace sppl
