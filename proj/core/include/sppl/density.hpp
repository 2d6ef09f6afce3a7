#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sppl/expr_program.hpp"
#include "sppl/graph.hpp"

namespace sppl {

// One cell of the analytic partition of latent space: the set where every
// predicate has the recorded sign.  Inside the cell the unnormalized log
// density is the single smooth function `log_smooth` (guard indicators have
// been resolved, so no select nodes remain in it).
struct Region {
  std::vector<std::uint8_t> polarity;       // per predicate; 1 = guard < 0
  std::vector<std::string> neg_guards;      // predicate ids with guard < 0
  std::vector<std::string> nonneg_guards;   // predicate ids with guard >= 0
  std::vector<std::string> active_vertices; // factors contributing in the cell
  ExprProgram log_smooth;
};

// Piecewise-smooth unnormalized log density of a compiled model, organized
// exactly as the factorization suggests: predicates carve latent space into
// sign regions, and each region owns one smooth summand.  Regions are
// materialized lazily, memoized by their sign vector, and shared across
// threads (reads take a shared lock).
class PiecewiseDensity {
 public:
  static constexpr std::size_t kDefaultRegionCap = 1'000'000;

  const std::vector<std::string>& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  int coord_index(const std::string& name) const;  // -1 if unknown
  std::size_t num_predicates() const { return pred_ids_.size(); }
  const std::vector<std::string>& predicate_ids() const { return pred_ids_; }

  // Unnormalized log density at `state` (coords order).  Total: states
  // outside the support give -infinity.  Throws SpplError(kind="density")
  // on dimension mismatch or non-finite entries.
  double log_density(std::span<const double> state) const;

  // Gradient of log_density into `grad_out` (dim() entries, zeroed first);
  // returns the value.  At a state outside the support the value is
  // -infinity and the gradient is left at zero — callers on hot paths check
  // the value instead of catching exceptions.
  double grad_log_density(std::span<const double> state,
                          std::span<double> grad_out) const;

  // Spec'd convenience: partial derivatives for named coordinates.  Throws
  // on unknown names and on states outside the support.
  std::vector<double> grad_log_density(std::span<const double> state,
                                       const std::vector<std::string>& wrt) const;

  // Signs and raw values of every predicate guard at `state`.
  // bits[i] = 1 iff guard_i(state) < 0.
  void predicate_bits(std::span<const double> state,
                      std::vector<std::uint8_t>& bits_out) const;
  void predicate_values(std::span<const double> state,
                        std::vector<double>& values_out) const;

  // Region access.  `region_index` materializes the region containing
  // `state` if needed and returns its stable index; indices are assigned in
  // materialization order.
  std::size_t region_index(std::span<const double> state) const;
  std::size_t region_index_for_bits(const std::vector<std::uint8_t>& bits) const;
  const Region& region(std::size_t index) const;
  const Region& region_at(std::span<const double> state) const;
  std::size_t region_count() const;  // materialized so far
  std::size_t region_cap() const { return cap_; }

  // Materializes all 2^P regions (requires num_predicates() <= 20; the cap
  // still applies).  For partition checks and small models.
  void materialize_all() const;

 private:
  friend PiecewiseDensity build_density(const GraphModel&, std::size_t);

  enum class DistKind : std::uint8_t { normal, uniform };
  struct Factor {
    bool observed = false;
    int slot = -1;       // latent coordinate, when not observed
    double datum = 0.0;  // observed value, when observed
    DistKind kind = DistKind::normal;
    std::vector<SymPtr> params;
    std::vector<std::pair<int, bool>> guard;  // (predicate index, wants neg)
    std::string name;
  };
  struct RegionStore;

  std::size_t materialize_index(const std::vector<std::uint8_t>& bits) const;
  ExprProgram build_region_program(const std::vector<std::uint8_t>& bits,
                                   std::vector<std::string>* active) const;

  std::vector<std::string> coords_;
  std::map<std::string, int> slot_of_;
  std::map<std::string, int> pred_index_;
  std::vector<std::string> pred_ids_;
  std::vector<ExprProgram> pred_programs_;  // may read earlier bits
  std::vector<Factor> factors_;
  std::size_t cap_ = kDefaultRegionCap;
  std::shared_ptr<RegionStore> store_;  // shared so the density is copyable
};

// Compiles the model's density.  `region_cap` bounds how many regions may
// ever be materialized; exceeding it throws SpplError(kind="region-cap").
PiecewiseDensity build_density(const GraphModel& model,
                               std::size_t region_cap =
                                   PiecewiseDensity::kDefaultRegionCap);

}  // namespace sppl
