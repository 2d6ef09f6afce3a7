#include "sppl/density.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <shared_mutex>

#include "sppl/diagnostics.hpp"

namespace sppl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Emits a closed expression into `prog`.  With `polarity` set, conditionals
// are resolved statically (region programs contain no selects); without it
// they become select nodes reading the predicate bit vector, restricted to
// indices below `pred_limit` so predicate programs only consult bits already
// computed.
int emit_sym(ExprProgram& prog, const SymPtr& e,
             const std::map<std::string, int>& slots,
             const std::map<std::string, int>& pred_idx,
             const std::vector<std::uint8_t>* polarity, int pred_limit) {
  return std::visit(
      [&](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SymConst>) {
          return prog.add_const(n.value);
        } else if constexpr (std::is_same_v<T, SymVar>) {
          auto it = slots.find(n.name);
          if (it == slots.end()) {
            throw SpplError("density", "expression reads unknown latent '" + n.name + "'");
          }
          return prog.add_input(it->second);
        } else if constexpr (std::is_same_v<T, SymApp>) {
          auto arg = [&](std::size_t i) {
            return emit_sym(prog, n.args[i], slots, pred_idx, polarity, pred_limit);
          };
          const std::size_t k = n.args.size();
          if (n.op == "+" || n.op == "*") {
            if (k == 0) return prog.add_const(n.op == "+" ? 0.0 : 1.0);
            const OpCode op = n.op == "+" ? OpCode::kAdd : OpCode::kMul;
            int acc = arg(0);
            for (std::size_t i = 1; i < k; ++i) {
              acc = prog.add_binary(op, acc, arg(i));
            }
            return acc;
          }
          if (n.op == "-") {
            if (k == 1) return prog.add_unary(OpCode::kNeg, arg(0));
            if (k == 2) return prog.add_binary(OpCode::kSub, arg(0), arg(1));
          }
          if (n.op == "/" && k == 2) {
            return prog.add_binary(OpCode::kDiv, arg(0), arg(1));
          }
          if (n.op == "exp" && k == 1) return prog.add_unary(OpCode::kExp, arg(0));
          if (n.op == "log" && k == 1) return prog.add_unary(OpCode::kLog, arg(0));
          if (n.op == "identity" && k == 1) return arg(0);
          if (n.op == "pow" && k == 2) {
            const auto* c = std::get_if<SymConst>(&n.args[1]->node);
            if (!c) {
              throw SpplError("density", "pow exponent must be a constant");
            }
            return prog.add_pow_const(arg(0), c->value);
          }
          throw SpplError("density", "cannot compile primitive '" + n.op +
                                         "' with " + std::to_string(k) + " arguments");
        } else {
          auto it = pred_idx.find(n.pred);
          if (it == pred_idx.end()) {
            throw SpplError("density", "expression references unknown predicate '" +
                                           n.pred + "'");
          }
          if (polarity) {
            const bool neg = (*polarity)[it->second] != 0;
            return emit_sym(prog, neg ? n.on_neg : n.on_nonneg, slots, pred_idx,
                            polarity, pred_limit);
          }
          if (it->second >= pred_limit) {
            throw SpplError("density", "predicate expression depends on '" + n.pred +
                                           "', which is not evaluated yet");
          }
          const int a = emit_sym(prog, n.on_neg, slots, pred_idx, polarity, pred_limit);
          const int b =
              emit_sym(prog, n.on_nonneg, slots, pred_idx, polarity, pred_limit);
          return prog.add_select(it->second, a, b);
        }
      },
      e->node);
}

}  // namespace

struct PiecewiseDensity::RegionStore {
  mutable std::shared_mutex mu;
  std::map<std::vector<std::uint8_t>, std::size_t> index;
  std::deque<Region> regions;
};

int PiecewiseDensity::coord_index(const std::string& name) const {
  auto it = slot_of_.find(name);
  return it == slot_of_.end() ? -1 : it->second;
}

namespace {

void check_state(std::span<const double> state, std::size_t dim) {
  if (state.size() != dim) {
    throw SpplError("density", "state has " + std::to_string(state.size()) +
                                   " entries, model has " + std::to_string(dim) +
                                   " coordinates");
  }
  for (double x : state) {
    if (!std::isfinite(x)) {
      throw SpplError("density", "state contains a non-finite entry");
    }
  }
}

}  // namespace

void PiecewiseDensity::predicate_bits(std::span<const double> state,
                                      std::vector<std::uint8_t>& bits_out) const {
  check_state(state, dim());
  thread_local std::vector<double> scratch;
  bits_out.resize(pred_programs_.size());
  for (std::size_t i = 0; i < pred_programs_.size(); ++i) {
    const double v = pred_programs_[i].eval(state, bits_out, scratch);
    bits_out[i] = v < 0.0 ? 1 : 0;
  }
}

void PiecewiseDensity::predicate_values(std::span<const double> state,
                                        std::vector<double>& values_out) const {
  check_state(state, dim());
  thread_local std::vector<double> scratch;
  thread_local std::vector<std::uint8_t> bits;
  bits.resize(pred_programs_.size());
  values_out.resize(pred_programs_.size());
  for (std::size_t i = 0; i < pred_programs_.size(); ++i) {
    values_out[i] = pred_programs_[i].eval(state, bits, scratch);
    bits[i] = values_out[i] < 0.0 ? 1 : 0;
  }
}

std::size_t PiecewiseDensity::materialize_index(
    const std::vector<std::uint8_t>& bits) const {
  if (!store_) throw SpplError("density", "density was not built");
  auto& st = *store_;
  {
    std::shared_lock lock(st.mu);
    if (auto it = st.index.find(bits); it != st.index.end()) return it->second;
  }
  std::unique_lock lock(st.mu);
  if (auto it = st.index.find(bits); it != st.index.end()) return it->second;
  if (st.regions.size() >= cap_) {
    throw SpplError("region-cap",
                    "materialized region count reached the cap of " +
                        std::to_string(cap_));
  }
  Region r;
  r.polarity = bits;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    (bits[i] ? r.neg_guards : r.nonneg_guards).push_back(pred_ids_[i]);
  }
  r.log_smooth = build_region_program(bits, &r.active_vertices);
  st.regions.push_back(std::move(r));
  const std::size_t idx = st.regions.size() - 1;
  st.index.emplace(bits, idx);
  return idx;
}

ExprProgram PiecewiseDensity::build_region_program(
    const std::vector<std::uint8_t>& bits, std::vector<std::string>* active) const {
  ExprProgram prog;
  int acc = -1;
  for (const Factor& f : factors_) {
    bool on = true;
    for (const auto& [idx, wants_neg] : f.guard) {
      if ((bits[idx] != 0) != wants_neg) {
        on = false;
        break;
      }
    }
    if (!on) continue;
    if (active) active->push_back(f.name);
    const int x = f.observed ? prog.add_const(f.datum) : prog.add_input(f.slot);
    const int p0 = emit_sym(prog, f.params[0], slot_of_, pred_index_, &bits, -1);
    const int p1 = emit_sym(prog, f.params[1], slot_of_, pred_index_, &bits, -1);
    const OpCode op = f.kind == DistKind::normal ? OpCode::kLogNormalPdf
                                                 : OpCode::kLogUniformPdf;
    const int term = prog.add_ternary(op, x, p0, p1);
    acc = acc < 0 ? term : prog.add_binary(OpCode::kAdd, acc, term);
  }
  if (acc < 0) acc = prog.add_const(0.0);
  prog.set_root(acc);
  return prog;
}

double PiecewiseDensity::log_density(std::span<const double> state) const {
  thread_local std::vector<std::uint8_t> bits;
  thread_local std::vector<double> scratch;
  predicate_bits(state, bits);
  const Region& r = region(materialize_index(bits));
  const double v = r.log_smooth.eval(state, bits, scratch);
  return std::isnan(v) ? kNegInf : v;
}

double PiecewiseDensity::grad_log_density(std::span<const double> state,
                                          std::span<double> grad_out) const {
  if (grad_out.size() != dim()) {
    throw SpplError("density", "gradient buffer size does not match dimension");
  }
  thread_local std::vector<std::uint8_t> bits;
  thread_local std::vector<double> scratch;
  thread_local std::vector<double> adjoint;
  predicate_bits(state, bits);
  const Region& r = region(materialize_index(bits));
  double v = r.log_smooth.eval_grad(state, bits, scratch, adjoint, grad_out);
  if (std::isnan(v)) v = kNegInf;
  if (v == kNegInf) {
    for (auto& g : grad_out) g = 0.0;
  }
  return v;
}

std::vector<double> PiecewiseDensity::grad_log_density(
    std::span<const double> state, const std::vector<std::string>& wrt) const {
  std::vector<double> full(dim());
  const double v = grad_log_density(state, full);
  if (!std::isfinite(v)) {
    throw SpplError("density", "gradient requested at a state outside the support");
  }
  std::vector<double> out;
  out.reserve(wrt.size());
  for (const auto& name : wrt) {
    const int idx = coord_index(name);
    if (idx < 0) throw SpplError("density", "unknown coordinate '" + name + "'");
    out.push_back(full[idx]);
  }
  return out;
}

std::size_t PiecewiseDensity::region_index(std::span<const double> state) const {
  thread_local std::vector<std::uint8_t> bits;
  predicate_bits(state, bits);
  return materialize_index(bits);
}

std::size_t PiecewiseDensity::region_index_for_bits(
    const std::vector<std::uint8_t>& bits) const {
  if (bits.size() != pred_programs_.size()) {
    throw SpplError("density", "polarity vector size does not match predicate count");
  }
  return materialize_index(bits);
}

const Region& PiecewiseDensity::region(std::size_t index) const {
  auto& st = *store_;
  std::shared_lock lock(st.mu);
  if (index >= st.regions.size()) {
    throw SpplError("density", "region index out of range");
  }
  // Regions are immutable once materialized and deque elements never move,
  // so the reference stays valid after the lock is released.
  return st.regions[index];
}

const Region& PiecewiseDensity::region_at(std::span<const double> state) const {
  return region(region_index(state));
}

std::size_t PiecewiseDensity::region_count() const {
  std::shared_lock lock(store_->mu);
  return store_->regions.size();
}

void PiecewiseDensity::materialize_all() const {
  const std::size_t p = pred_programs_.size();
  if (p > 20) {
    throw SpplError("density",
                    "refusing to materialize 2^" + std::to_string(p) + " regions");
  }
  std::vector<std::uint8_t> bits(p);
  for (std::size_t mask = 0; mask < (std::size_t{1} << p); ++mask) {
    for (std::size_t i = 0; i < p; ++i) bits[i] = (mask >> i) & 1;
    materialize_index(bits);
  }
}

PiecewiseDensity build_density(const GraphModel& model, std::size_t region_cap) {
  PiecewiseDensity pd;
  pd.cap_ = region_cap;
  pd.store_ = std::make_shared<PiecewiseDensity::RegionStore>();
  pd.coords_ = model.latent_names();
  for (std::size_t i = 0; i < pd.coords_.size(); ++i) {
    pd.slot_of_[pd.coords_[i]] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < model.predicates.size(); ++i) {
    pd.pred_index_[model.predicates[i].id] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < model.predicates.size(); ++i) {
    const Predicate& p = model.predicates[i];
    ExprProgram prog;
    prog.set_root(emit_sym(prog, p.expr, pd.slot_of_, pd.pred_index_, nullptr,
                           static_cast<int>(i)));
    pd.pred_ids_.push_back(p.id);
    pd.pred_programs_.push_back(std::move(prog));
  }
  for (const Vertex& v : model.vertices) {
    PiecewiseDensity::Factor f;
    f.name = v.name;
    f.observed = v.kind == VertexKind::observed;
    if (f.observed) {
      if (!v.datum) {
        throw SpplError("density", "observed vertex '" + v.name + "' has no datum");
      }
      f.datum = *v.datum;
    } else {
      f.slot = pd.slot_of_.at(v.name);
    }
    if (v.dist.kind == "normal") {
      f.kind = PiecewiseDensity::DistKind::normal;
    } else if (v.dist.kind == "uniform") {
      f.kind = PiecewiseDensity::DistKind::uniform;
    } else {
      throw SpplError("density", "vertex '" + v.name + "' has unknown distribution '" +
                                     v.dist.kind + "'");
    }
    if (v.dist.params.size() != 2) {
      throw SpplError("density", "vertex '" + v.name + "' needs 2 distribution parameters");
    }
    f.params = v.dist.params;
    for (const auto& g : v.guard) {
      f.guard.emplace_back(pd.pred_index_.at(g.pred), g.polarity == Polarity::neg);
    }
    pd.factors_.push_back(std::move(f));
  }
  return pd;
}

}  // namespace sppl
