#include "sppl/gmm_match.hpp"

#include <cmath>
#include <map>
#include <set>

#include "sppl/diagnostics.hpp"
#include "sppl/util.hpp"

namespace sppl {

namespace {

const double* as_const(const SymPtr& e) {
  const auto* c = std::get_if<SymConst>(&e->node);
  return c ? &c->value : nullptr;
}

const std::string* as_var(const SymPtr& e) {
  const auto* v = std::get_if<SymVar>(&e->node);
  return v ? &v->name : nullptr;
}

// Recognizes a predicate guard of the shape (- u c) or bare u, returning the
// tested variable and threshold.
bool split_threshold(const SymPtr& e, std::string* var, double* threshold) {
  if (const auto* v = as_var(e)) {
    *var = *v;
    *threshold = 0.0;
    return true;
  }
  const auto* app = std::get_if<SymApp>(&e->node);
  if (!app || app->op != "-" || app->args.size() != 2) return false;
  const auto* v = as_var(app->args[0]);
  const auto* c = as_const(app->args[1]);
  if (!v || !c) return false;
  *var = *v;
  *threshold = *c;
  return true;
}

}  // namespace

std::optional<GmmRecognition> match_gmm(const GraphModel& model) {
  const auto cls = classify_coordinates(model);

  // Partition the vertices into the three roles the family has.
  std::vector<const Vertex*> mus, us, obs;
  for (const Vertex& v : model.vertices) {
    if (v.kind == VertexKind::observed) {
      obs.push_back(&v);
      continue;
    }
    const auto it = cls.find(v.name);
    if (it != cls.end() && it->second == CoordClass::discontinuous) {
      us.push_back(&v);
    } else {
      mus.push_back(&v);
    }
  }
  if (mus.size() != 2 || us.empty()) return std::nullopt;
  const std::size_t n_data = us.size();
  if (model.predicates.size() != n_data || obs.size() != 2 * n_data) {
    return std::nullopt;
  }

  // Component means: unconditional normals with a shared constant prior.
  double mu0 = 0.0, sigma0 = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const Vertex* v = mus[k];
    if (!v->guard.empty() || v->dist.kind != "normal" ||
        v->dist.params.size() != 2) {
      return std::nullopt;
    }
    const double* m = as_const(v->dist.params[0]);
    const double* s = as_const(v->dist.params[1]);
    if (!m || !s || !(*s > 0.0)) return std::nullopt;
    if (k == 0) {
      mu0 = *m;
      sigma0 = *s;
    } else if (*m != mu0 || *s != sigma0) {
      return std::nullopt;
    }
  }
  std::map<std::string, std::size_t> mu_index;
  mu_index[mus[0]->name] = 0;
  mu_index[mus[1]->name] = 1;

  // Selector draws: unconditional uniforms with constant bounds.
  std::map<std::string, std::pair<double, double>> u_bounds;
  for (const Vertex* v : us) {
    if (!v->guard.empty() || v->dist.kind != "uniform" ||
        v->dist.params.size() != 2) {
      return std::nullopt;
    }
    const double* lo = as_const(v->dist.params[0]);
    const double* hi = as_const(v->dist.params[1]);
    if (!lo || !hi || !(*hi > *lo)) return std::nullopt;
    u_bounds[v->name] = {*lo, *hi};
  }

  // Observations by guard literal.
  std::map<std::string, const Vertex*> on_neg, on_nonneg;
  for (const Vertex* v : obs) {
    if (v->guard.size() != 1) return std::nullopt;
    auto& side = v->guard[0].polarity == Polarity::neg ? on_neg : on_nonneg;
    if (!side.emplace(v->guard[0].pred, v).second) return std::nullopt;
  }

  GmmRecognition rec;
  rec.spec.K = 2;
  rec.spec.mu0 = mu0;
  rec.spec.sigma0 = sigma0;
  rec.spec.sigma_obs.assign(2, 0.0);
  rec.spec.p0.assign(2, 0.0);
  rec.mean_coords = {mus[0]->name, mus[1]->name};

  std::size_t neg_component = 2;  // which mean the neg branch observes
  double p_neg = 0.0;
  std::set<std::string> used_us;

  for (const Predicate& pred : model.predicates) {
    std::string u_name;
    double threshold = 0.0;
    if (!split_threshold(pred.expr, &u_name, &threshold)) return std::nullopt;
    const auto bounds = u_bounds.find(u_name);
    if (bounds == u_bounds.end()) return std::nullopt;
    if (!used_us.insert(u_name).second) return std::nullopt;  // one point per u
    const auto [lo, hi] = bounds->second;
    if (!(threshold > lo) || !(threshold < hi)) return std::nullopt;
    const double p = (threshold - lo) / (hi - lo);

    const auto a = on_neg.find(pred.id);
    const auto b = on_nonneg.find(pred.id);
    if (a == on_neg.end() || b == on_nonneg.end()) return std::nullopt;

    // Each branch observes one component mean with constant noise, and both
    // branches condition the same datum.
    std::size_t comp[2];
    double sigma[2];
    double datum[2];
    const Vertex* pair[2] = {a->second, b->second};
    for (int side = 0; side < 2; ++side) {
      const Vertex* v = pair[side];
      if (v->dist.kind != "normal" || v->dist.params.size() != 2 || !v->datum) {
        return std::nullopt;
      }
      const std::string* mean = as_var(v->dist.params[0]);
      const double* s = as_const(v->dist.params[1]);
      if (!mean || !s || !(*s > 0.0)) return std::nullopt;
      const auto mi = mu_index.find(*mean);
      if (mi == mu_index.end()) return std::nullopt;
      comp[side] = mi->second;
      sigma[side] = *s;
      datum[side] = *v->datum;
    }
    if (comp[0] == comp[1] || datum[0] != datum[1]) return std::nullopt;

    // The branch-to-component mapping and the mixture weight must agree
    // across data points, or the graph is not iid draws from one mixture.
    if (neg_component == 2) {
      neg_component = comp[0];
      p_neg = p;
      rec.spec.sigma_obs[comp[0]] = sigma[0];
      rec.spec.sigma_obs[comp[1]] = sigma[1];
    } else if (comp[0] != neg_component || p != p_neg ||
               sigma[0] != rec.spec.sigma_obs[comp[0]] ||
               sigma[1] != rec.spec.sigma_obs[comp[1]]) {
      return std::nullopt;
    }
    rec.spec.data.push_back(datum[0]);
  }

  rec.spec.p0[neg_component] = p_neg;
  rec.spec.p0[1 - neg_component] = 1.0 - p_neg;
  return rec;
}

std::string render_gmm_source(const GmmSpec& spec) {
  if (spec.K != 2 || spec.p0.size() != 2 || spec.sigma_obs.size() != 2 ||
      spec.data.empty()) {
    throw SpplError("oracle", "source rendering needs a two-component spec");
  }
  const double c = spec.p0[0];
  if (!(c > 0.0) || !(c < 1.0)) {
    throw SpplError("oracle",
                    "mixture weight must lie strictly inside (0, 1)");
  }
  const std::string prior = "(sample (normal " + format_double(spec.mu0) +
                            " " + format_double(spec.sigma0) + "))";
  std::string out;
  out += "; two-component mixture: indicators u ~ uniform(0, 1) split at " +
         format_double(c) + ",\n";
  out += "; means mu1 (u below the split) and mu2 (u at or above it).\n";
  out += "(let [mu1 " + prior + "]\n";
  out += "(let [mu2 " + prior + "]\n";
  for (double datum : spec.data) {
    const std::string d = format_double(datum);
    out += "(let [u (sample (uniform 0 1))]\n";
    out += "(let [_ (if (< u " + format_double(c) + ")\n";
    out += "            (observe (normal mu1 " +
           format_double(spec.sigma_obs[0]) + ") " + d + ")\n";
    out += "            (observe (normal mu2 " +
           format_double(spec.sigma_obs[1]) + ") " + d + "))]\n";
  }
  out += "(- mu2 mu1)";
  out.append(2 + 2 * spec.data.size(), ')');
  out += "\n";
  return out;
}

}  // namespace sppl
