#include "sppl/samplers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "sppl/diagnostics.hpp"

namespace sppl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kInitAttempts = 10000;
}  // namespace

Engine engine_from_name(const std::string& name) {
  if (name == "hmc") return Engine::hmc;
  if (name == "dhmc") return Engine::dhmc;
  if (name == "mwg") return Engine::mwg;
  throw SpplError("config", "unknown engine '" + name + "'");
}

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::hmc: return "hmc";
    case Engine::dhmc: return "dhmc";
    case Engine::mwg: return "mwg";
  }
  return "?";
}

Sampler::Sampler(const GraphModel& model, const PiecewiseDensity& pd,
                 SamplerConfig config)
    : model_(model), pd_(pd), config_(std::move(config)) {
  const std::size_t k = pd_.dim();
  if (config_.mass.empty()) {
    mass_.assign(k, 1.0);
  } else if (config_.mass.size() == k) {
    mass_ = config_.mass;
  } else {
    throw SpplError("config", "mass vector has " + std::to_string(config_.mass.size()) +
                                  " entries for " + std::to_string(k) + " coordinates");
  }
  for (double m : mass_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw SpplError("config", "masses must be positive and finite");
    }
  }
  if (!(config_.step_size > 0.0) || !std::isfinite(config_.step_size)) {
    throw SpplError("config", "step size must be positive");
  }
  if (config_.leapfrog_steps < 1) {
    throw SpplError("config", "leapfrog step count must be at least 1");
  }

  // The classification is recomputed from the predicate table rather than
  // read from the (possibly hand-edited) stored map: correctness of the
  // discontinuous updates depends on it matching the predicates exactly.
  const auto cls = classify_coordinates(model_);
  for (std::size_t i = 0; i < k; ++i) {
    all_slots_.push_back(static_cast<std::uint32_t>(i));
    const auto it = cls.find(pd_.coords()[i]);
    const bool disc = it != cls.end() && it->second == CoordClass::discontinuous;
    (disc ? disc_slots_ : cont_slots_).push_back(static_cast<std::uint32_t>(i));
  }

  // Single-site proposals: an independence draw from the prior for
  // constant-bounds uniform coordinates, a random walk scaled by the mass
  // everywhere else.
  proposals_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    proposals_[i].scale = mass_[i];
    const Vertex* v = model_.find_vertex(pd_.coords()[i]);
    if (!v || v->dist.kind != "uniform" || v->dist.params.size() != 2) continue;
    const auto* lo = std::get_if<SymConst>(&v->dist.params[0]->node);
    const auto* hi = std::get_if<SymConst>(&v->dist.params[1]->node);
    if (lo && hi && hi->value > lo->value) {
      proposals_[i] = MwgProposal{true, lo->value, hi->value, mass_[i]};
    }
  }
}

const std::vector<std::uint32_t>& Sampler::continuous_slots(Engine e) const {
  return e == Engine::hmc ? all_slots_ : cont_slots_;
}

const std::vector<std::uint32_t>& Sampler::discontinuous_slots(Engine e) const {
  static const std::vector<std::uint32_t> kEmpty;
  return e == Engine::hmc ? kEmpty : disc_slots_;
}

double Sampler::logd(std::span<const double> state) {
  ++density_evals_;
  return pd_.log_density(state);
}

double Sampler::logd_grad(std::span<const double> state, std::span<double> grad) {
  ++grad_evals_;
  return pd_.grad_log_density(state, grad);
}

Momentum Sampler::draw_momentum(Engine e, RandomStream& rng) {
  Momentum p;
  const auto& cont = continuous_slots(e);
  const auto& disc = discontinuous_slots(e);
  p.cont.reserve(cont.size());
  p.disc.reserve(disc.size());
  for (const std::uint32_t slot : cont) {
    p.cont.push_back(rng.normal() * std::sqrt(mass_[slot]));
  }
  for (const std::uint32_t slot : disc) {
    p.disc.push_back(rng.laplace(mass_[slot]));
  }
  return p;
}

double Sampler::kinetic_energy(Engine e, const Momentum& p) const {
  const auto& cont = continuous_slots(e);
  const auto& disc = discontinuous_slots(e);
  double k = 0.0;
  for (std::size_t i = 0; i < cont.size(); ++i) {
    k += p.cont[i] * p.cont[i] / (2.0 * mass_[cont[i]]);
  }
  for (std::size_t i = 0; i < disc.size(); ++i) {
    k += std::abs(p.disc[i]) / mass_[disc[i]];
  }
  return k;
}

Sampler::Trajectory Sampler::run_integrator(
    Engine e, const LatentState& x0, const Momentum& p0, RandomStream* perm_rng,
    const std::vector<std::vector<std::uint32_t>>* forced) {
  const auto& cont = continuous_slots(e);
  const auto& disc = discontinuous_slots(e);
  const double eps = config_.step_size;
  const int steps = config_.leapfrog_steps;
  const std::size_t n_pred = pd_.num_predicates();

  if (forced) {
    if (forced->size() != static_cast<std::size_t>(steps)) {
      throw SpplError("sampler", "expected one permutation per leapfrog step");
    }
    for (const auto& perm : *forced) {
      if (perm.size() != disc.size()) {
        throw SpplError("sampler", "permutation size does not match the "
                                   "discontinuous coordinate count");
      }
    }
  }

  Trajectory t;
  t.state = x0;
  t.momentum = p0;

  std::vector<double> grad(pd_.dim(), 0.0);
  double potential;
  if (cont.empty()) {
    potential = -logd(t.state);
  } else {
    potential = -logd_grad(t.state, grad);
  }
  t.initial_potential = potential;
  if (!std::isfinite(potential)) {
    t.divergent = true;
    t.potential = kInf;
    return t;
  }

  std::vector<std::uint8_t> bits_cur, bits_new, flip_acc;
  if (n_pred > 0) {
    pd_.predicate_bits(t.state, bits_cur);
    flip_acc.assign(n_pred, 0);
  }

  std::vector<std::uint32_t> perm(disc.size());
  std::iota(perm.begin(), perm.end(), 0u);

  for (int step = 0; step < steps && !t.divergent; ++step) {
    // Half kick for the drift coordinates; `grad` is d(log density)/dx, so
    // the potential gradient enters with opposite sign.
    for (std::size_t i = 0; i < cont.size(); ++i) {
      t.momentum.cont[i] += 0.5 * eps * grad[cont[i]];
    }
    // Half drift, then refresh the potential at the moved state.
    if (!cont.empty()) {
      for (std::size_t i = 0; i < cont.size(); ++i) {
        t.state[cont[i]] += 0.5 * eps * t.momentum.cont[i] / mass_[cont[i]];
      }
      potential = -logd(t.state);
      if (!std::isfinite(potential)) {
        t.divergent = true;
        break;
      }
    }

    // Coordinatewise updates through boundaries, in a fresh random order.
    if (!disc.empty()) {
      if (forced) {
        perm = (*forced)[step];
      } else {
        std::iota(perm.begin(), perm.end(), 0u);
        if (config_.permute_discontinuous) perm_rng->shuffle(perm);
      }
      t.permutations.push_back(perm);

      for (const std::uint32_t pos : perm) {
        const std::uint32_t slot = disc[pos];
        const double m = mass_[slot];
        double& pj = t.momentum.disc[pos];
        const double sign = pj < 0.0 ? -1.0 : 1.0;
        const double kinetic_j = std::abs(pj) / m;

        CoordUpdateRecord rec;
        if (hook_) {
          rec.slot = slot;
          rec.state_before = t.state;
          rec.kinetic_before = kinetic_j;
        }

        const double old = t.state[slot];
        t.state[slot] = old + eps * sign / m;
        const double proposed = -logd(t.state);
        const double delta_u = proposed - potential;  // NaN never occurs: -inf maps to +inf delta

        if (kinetic_j > delta_u) {
          potential = proposed;
          pj = sign * (std::abs(pj) - m * delta_u);
          if (n_pred > 0) {
            pd_.predicate_bits(t.state, bits_new);
            for (std::size_t b = 0; b < n_pred; ++b) {
              flip_acc[b] ^= bits_cur[b] ^ bits_new[b];
            }
            std::swap(bits_cur, bits_new);
          }
          if (hook_) rec.committed = true;
        } else {
          t.state[slot] = old;
          pj = -pj;
        }

        if (hook_) {
          rec.delta_u = delta_u;
          rec.kinetic_after = std::abs(pj) / m;
          rec.state_after = t.state;
          hook_(rec);
        }
      }
    }

    // Second half drift and half kick (gradient at the new state feeds the
    // next step's first half kick unchanged).
    if (!cont.empty()) {
      for (std::size_t i = 0; i < cont.size(); ++i) {
        t.state[cont[i]] += 0.5 * eps * t.momentum.cont[i] / mass_[cont[i]];
      }
      potential = -logd_grad(t.state, grad);
      if (!std::isfinite(potential)) {
        t.divergent = true;
        break;
      }
      for (std::size_t i = 0; i < cont.size(); ++i) {
        t.momentum.cont[i] += 0.5 * eps * grad[cont[i]];
      }
    }

    // With no coordinatewise updates in the partition, drift moves can still
    // cross boundaries (plain leapfrog over a discontinuous target); account
    // for them once per step.
    if (n_pred > 0 && disc.empty()) {
      pd_.predicate_bits(t.state, bits_new);
      for (std::size_t b = 0; b < n_pred; ++b) {
        flip_acc[b] ^= bits_cur[b] ^ bits_new[b];
      }
      std::swap(bits_cur, bits_new);
    }
  }

  t.potential = t.divergent ? kInf : potential;
  for (std::size_t b = 0; b < flip_acc.size(); ++b) {
    if (flip_acc[b]) t.flips.push_back(static_cast<std::uint32_t>(b));
  }
  return t;
}

Sampler::Trajectory Sampler::integrate(Engine e, const LatentState& x0,
                                       const Momentum& p0, RandomStream& rng) {
  return run_integrator(e, x0, p0, &rng, nullptr);
}

Sampler::Trajectory Sampler::integrate_with_permutations(
    Engine e, const LatentState& x0, const Momentum& p0,
    const std::vector<std::vector<std::uint32_t>>& perms) {
  return run_integrator(e, x0, p0, nullptr, &perms);
}

StepMeta Sampler::hamiltonian_step(Engine e, LatentState& state,
                                   RandomStream& rng) {
  const Momentum p = draw_momentum(e, rng);
  const double kinetic0 = kinetic_energy(e, p);
  Trajectory t = run_integrator(e, state, p, &rng, nullptr);
  const double h0 = t.initial_potential + kinetic0;
  const double h1 = t.potential + kinetic_energy(e, t.momentum);

  StepMeta meta;
  meta.energy_error = h1 - h0;
  // Accept with probability exp(-(H1 - H0)); a divergent proposal has
  // infinite energy error and is never accepted.
  const bool accept = std::log(rng.uniform01()) < -meta.energy_error;
  meta.accepted = accept;
  if (accept) {
    state = t.state;
    meta.log_density = -t.potential;
    meta.flips = std::move(t.flips);  // telescoped: endpoint sign differences
  } else {
    meta.log_density = -t.initial_potential;
  }
  return meta;
}

StepMeta Sampler::hmc_step(LatentState& state, RandomStream& rng) {
  return hamiltonian_step(Engine::hmc, state, rng);
}

StepMeta Sampler::dhmc_step(LatentState& state, RandomStream& rng) {
  return hamiltonian_step(Engine::dhmc, state, rng);
}

StepMeta Sampler::mwg_step(LatentState& state, RandomStream& rng) {
  const std::size_t k = pd_.dim();
  const std::size_t n_pred = pd_.num_predicates();
  std::vector<std::uint8_t> bits_before, bits_after;
  if (n_pred > 0) pd_.predicate_bits(state, bits_before);

  double log_cur = logd(state);
  bool any = false;
  for (std::size_t i = 0; i < k; ++i) {
    const MwgProposal& q = proposals_[i];
    const double old = state[i];
    state[i] = q.uniform ? rng.uniform(q.lo, q.hi) : old + q.scale * rng.normal();
    const double log_prop = logd(state);
    // Both proposal families are symmetric in the acceptance ratio: the
    // random walk by construction, the independence draw because its density
    // is the same constant at old and new point.
    if (std::log(rng.uniform01()) < log_prop - log_cur) {
      log_cur = log_prop;
      any = true;
    } else {
      state[i] = old;
    }
  }

  StepMeta meta;
  meta.accepted = any;
  meta.log_density = log_cur;
  meta.energy_error = 0.0;
  if (n_pred > 0) {
    pd_.predicate_bits(state, bits_after);
    for (std::size_t b = 0; b < n_pred; ++b) {
      if (bits_before[b] != bits_after[b]) {
        meta.flips.push_back(static_cast<std::uint32_t>(b));
      }
    }
  }
  return meta;
}

StepMeta Sampler::step(LatentState& state, RandomStream& rng) {
  switch (config_.engine) {
    case Engine::hmc: return hmc_step(state, rng);
    case Engine::dhmc: return dhmc_step(state, rng);
    case Engine::mwg: return mwg_step(state, rng);
  }
  throw SpplError("config", "invalid engine");
}

namespace {

// One ancestral pass in vertex order.  Returns false when a guard-active
// vertex has invalid parameters (that draw cannot contribute a finite joint
// density); guard-inactive latents still get a value so the state is total —
// from their own distribution when possible, from a standard normal
// otherwise.
bool try_ancestral(const GraphModel& model, RandomStream& rng,
                   std::map<std::string, double>& out) {
  out.clear();
  for (const Vertex& v : model.vertices) {
    bool active = true;
    for (const GuardLiteral& g : v.guard) {
      const Predicate* p = model.find_predicate(g.pred);
      if (!p) throw SpplError("init", "unknown predicate '" + g.pred + "'");
      const bool neg = eval_sym(model, p->expr, out) < 0.0;
      if (neg != (g.polarity == Polarity::neg)) {
        active = false;
        break;
      }
    }
    if (v.kind == VertexKind::observed) continue;

    const double a = eval_sym(model, v.dist.params[0], out);
    const double b = eval_sym(model, v.dist.params[1], out);
    const bool normal = v.dist.kind == "normal";
    const bool valid = std::isfinite(a) && std::isfinite(b) &&
                       (normal ? b > 0.0 : b > a);
    double draw;
    if (valid) {
      draw = normal ? rng.normal(a, b) : rng.uniform(a, b);
    } else if (!active) {
      draw = rng.normal(0.0, 1.0);
    } else {
      return false;
    }
    out[v.name] = draw;
  }
  return true;
}

}  // namespace

std::map<std::string, double> ancestral_sample(const GraphModel& model,
                                               RandomStream& rng) {
  std::map<std::string, double> out;
  if (!try_ancestral(model, rng, out)) {
    throw SpplError("init", "ancestral draw hit invalid distribution parameters");
  }
  return out;
}

LatentState Sampler::init_state(RandomStream& rng) {
  std::map<std::string, double> draw;
  LatentState x(pd_.dim());
  for (int attempt = 0; attempt < kInitAttempts; ++attempt) {
    if (!try_ancestral(model_, rng, draw)) continue;
    for (std::size_t i = 0; i < pd_.dim(); ++i) {
      x[i] = draw.at(pd_.coords()[i]);
    }
    if (std::isfinite(logd(x))) return x;
  }
  throw SpplError("init", "no initial state with finite density after " +
                              std::to_string(kInitAttempts) + " attempts");
}

namespace {

ChainResult run_single(const GraphModel& model, const PiecewiseDensity& pd,
                       const SamplerConfig& config, std::size_t chain_index) {
  ChainResult res;
  res.coords = pd.coords();
  if (config.num_samples == 0) return res;

  RandomStream rng = RandomStream::for_chain(config.seed, chain_index);
  Sampler sampler(model, pd, config);
  LatentState x = sampler.init_state(rng);
  for (std::size_t i = 0; i < config.burn_in; ++i) sampler.step(x, rng);

  res.samples.reserve(config.num_samples * pd.dim());
  res.meta.reserve(config.num_samples);
  for (std::size_t i = 0; i < config.num_samples; ++i) {
    StepMeta meta = sampler.step(x, rng);
    res.samples.insert(res.samples.end(), x.begin(), x.end());
    res.meta.push_back(std::move(meta));
  }
  res.num_kept = config.num_samples;
  res.density_evals = sampler.density_evals();
  res.grad_evals = sampler.grad_evals();
  return res;
}

}  // namespace

ChainResult run_chain(const GraphModel& model, const PiecewiseDensity& pd,
                      const SamplerConfig& config) {
  return run_single(model, pd, config, 0);
}

std::vector<ChainResult> run_chains(const GraphModel& model,
                                    const PiecewiseDensity& pd,
                                    const SamplerConfig& config,
                                    std::size_t n_chains, std::size_t threads) {
  std::vector<ChainResult> results(n_chains);
  if (n_chains == 0) return results;
  threads = std::max<std::size_t>(1, std::min(threads, n_chains));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chains) return;
      try {
        results[c] = run_single(model, pd, config, c);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace sppl
