#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sppl/boundary.hpp"
#include "sppl/density.hpp"
#include "sppl/graph.hpp"
#include "sppl/rng.hpp"

namespace sppl {

// Latent state in pd.coords() order.
using LatentState = std::vector<double>;

enum class Engine { hmc, dhmc, mwg };

Engine engine_from_name(const std::string& name);  // throws on unknown
const char* engine_name(Engine e);

struct SamplerConfig {
  Engine engine = Engine::dhmc;
  double step_size = 0.1;
  int leapfrog_steps = 20;
  std::vector<double> mass;  // per coordinate; empty = all ones
  std::size_t num_samples = 100000;
  std::size_t burn_in = 10000;
  std::uint64_t seed = 0;
  // Resample the discontinuous update order each integrator step; false pins
  // the fixed slot order (and consumes no randomness for ordering).
  bool permute_discontinuous = true;
};

// Momentum split by integrator role: Gaussian components for coordinates
// integrated with leapfrog drift, Laplace components for coordinates updated
// one at a time through boundaries.
struct Momentum {
  std::vector<double> cont;  // aligned with Sampler::continuous_slots()
  std::vector<double> disc;  // aligned with Sampler::discontinuous_slots()
};

struct StepMeta {
  bool accepted = false;
  double log_density = 0.0;           // at the post-step state
  double energy_error = 0.0;          // proposed H minus initial H; 0 for mwg
  std::vector<std::uint32_t> flips;   // predicate indices crossed this step
};

struct ChainResult {
  std::vector<std::string> coords;
  std::size_t num_kept = 0;
  std::vector<double> samples;  // row-major, num_kept x coords.size()
  std::vector<StepMeta> meta;   // per kept step
  std::uint64_t density_evals = 0;
  std::uint64_t grad_evals = 0;

  std::span<const double> row(std::size_t i) const {
    return {samples.data() + i * coords.size(), coords.size()};
  }
};

// Callback fired once per coordinatewise discontinuous update inside the
// integrator; drives boundary-crossing audits without touching the sampler's
// control flow.
struct CoordUpdateRecord {
  std::uint32_t slot = 0;            // coordinate updated
  bool committed = false;            // jump accepted (vs momentum reflected)
  double delta_u = 0.0;              // potential change of the attempted jump
  double kinetic_before = 0.0;       // |p|/m for this coordinate
  double kinetic_after = 0.0;
  LatentState state_before;
  LatentState state_after;
};
using CoordUpdateHook = std::function<void(const CoordUpdateRecord&)>;

class Sampler {
 public:
  Sampler(const GraphModel& model, const PiecewiseDensity& pd,
          SamplerConfig config);

  // One MCMC transition of the configured engine.
  StepMeta step(LatentState& state, RandomStream& rng);

  // The three kernels, also callable directly.  hmc integrates every
  // coordinate with leapfrog drift; dhmc routes discontinuous coordinates
  // through coordinatewise jump updates; mwg is a single-site
  // Metropolis-within-Gibbs sweep.
  StepMeta hmc_step(LatentState& state, RandomStream& rng);
  StepMeta dhmc_step(LatentState& state, RandomStream& rng);
  StepMeta mwg_step(LatentState& state, RandomStream& rng);

  // Ancestral draw from the prior restricted to active guards; retries until
  // the joint density is finite.  Throws SpplError(kind="init") after 10^4
  // failed attempts.
  LatentState init_state(RandomStream& rng);

  // --- integrator surface (exposed for reversibility/audit tests) ---
  struct Trajectory {
    LatentState state;
    Momentum momentum;
    // One entry per leapfrog step: the update order as positions into
    // discontinuous_slots().
    std::vector<std::vector<std::uint32_t>> permutations;
    double initial_potential = 0.0;  // -log density at the start state
    double potential = 0.0;          // -log density at `state`; +inf if divergent
    bool divergent = false;
    std::vector<std::uint32_t> flips;  // predicate indices, sign-changed
  };

  Momentum draw_momentum(Engine e, RandomStream& rng);
  double kinetic_energy(Engine e, const Momentum& p) const;
  // Runs leapfrog_steps of the mixed integrator, drawing one fresh
  // permutation of the discontinuous coordinates per step.
  Trajectory integrate(Engine e, const LatentState& x0, const Momentum& p0,
                       RandomStream& rng);
  // Same but with the permutations pinned — the reversal harness feeds the
  // forward permutations back reversed.
  Trajectory integrate_with_permutations(
      Engine e, const LatentState& x0, const Momentum& p0,
      const std::vector<std::vector<std::uint32_t>>& perms);

  const std::vector<std::uint32_t>& continuous_slots(Engine e) const;
  const std::vector<std::uint32_t>& discontinuous_slots(Engine e) const;
  const std::vector<double>& masses() const { return mass_; }

  void set_coord_update_hook(CoordUpdateHook hook) { hook_ = std::move(hook); }

  std::uint64_t density_evals() const { return density_evals_; }
  std::uint64_t grad_evals() const { return grad_evals_; }

 private:
  struct MwgProposal {
    bool uniform = false;
    double lo = 0.0, hi = 0.0;  // uniform-prior coordinates
    double scale = 1.0;         // random-walk stddev otherwise
  };

  Trajectory run_integrator(Engine e, const LatentState& x0, const Momentum& p0,
                            RandomStream* perm_rng,
                            const std::vector<std::vector<std::uint32_t>>* perms);
  StepMeta hamiltonian_step(Engine e, LatentState& state, RandomStream& rng);
  double logd(std::span<const double> state);
  double logd_grad(std::span<const double> state, std::span<double> grad);

  const GraphModel& model_;
  const PiecewiseDensity& pd_;
  SamplerConfig config_;
  std::vector<double> mass_;
  std::vector<std::uint32_t> all_slots_;   // hmc partition: everything drifts
  std::vector<std::uint32_t> cont_slots_;  // dhmc partition
  std::vector<std::uint32_t> disc_slots_;
  std::vector<MwgProposal> proposals_;
  CoordUpdateHook hook_;
  std::uint64_t density_evals_ = 0;
  std::uint64_t grad_evals_ = 0;
};

// Runs one chain to completion: derives the chain-0 stream from the seed,
// draws an initial state ancestrally, discards burn_in transitions, then
// records num_samples states with per-step metadata.
ChainResult run_chain(const GraphModel& model, const PiecewiseDensity& pd,
                      const SamplerConfig& config);

// Independent chains on distinct streams (chain index 0..n-1), executed on
// up to `threads` worker threads.  The density's region memo is shared.
std::vector<ChainResult> run_chains(const GraphModel& model,
                                    const PiecewiseDensity& pd,
                                    const SamplerConfig& config,
                                    std::size_t n_chains, std::size_t threads);

// Ancestral prior draw over all latent vertices (guard-inactive ones
// included, so the map is total); used by init_state and directly by tests.
std::map<std::string, double> ancestral_sample(const GraphModel& model,
                                               RandomStream& rng);

}  // namespace sppl
