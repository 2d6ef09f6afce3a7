#include "sppl/boundary.hpp"

#include "sppl/diagnostics.hpp"

namespace sppl {

PredicateSnapshot snapshot(const GraphModel& model,
                           const std::map<std::string, double>& state) {
  PredicateSnapshot s;
  s.bits.reserve(model.predicates.size());
  for (const auto& p : model.predicates) {
    s.bits.push_back(eval_sym(model, p.expr, state) < 0.0 ? 1 : 0);
  }
  return s;
}

PredicateSnapshot snapshot(const PiecewiseDensity& pd,
                           std::span<const double> state) {
  PredicateSnapshot s;
  pd.predicate_bits(state, s.bits);
  return s;
}

std::vector<std::uint32_t> detect_crossing(const PredicateSnapshot& before,
                                           const PredicateSnapshot& after) {
  if (before.bits.size() != after.bits.size()) {
    throw SpplError("boundary", "snapshots cover different predicate counts");
  }
  std::vector<std::uint32_t> crossed;
  for (std::size_t i = 0; i < before.bits.size(); ++i) {
    if (before.bits[i] != after.bits[i]) {
      crossed.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return crossed;
}

std::vector<std::string> detect_crossing(const PredicateSnapshot& before,
                                         const PredicateSnapshot& after,
                                         const GraphModel& model) {
  if (before.bits.size() != model.predicates.size()) {
    throw SpplError("boundary", "snapshot does not match the model's predicate table");
  }
  std::vector<std::string> ids;
  for (std::uint32_t i : detect_crossing(before, after)) {
    ids.push_back(model.predicates[i].id);
  }
  return ids;
}

}  // namespace sppl
