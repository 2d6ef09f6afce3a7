#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sppl/graph.hpp"
#include "sppl/oracle.hpp"

namespace sppl {

// Result of recognizing a compiled graph as a two-component mixture of the
// exact-posterior family: the recovered spec plus which latent coordinates
// are the component means (component order matches spec.p0 / spec.sigma_obs).
struct GmmRecognition {
  GmmSpec spec;
  std::vector<std::string> mean_coords;
};

// Structural matcher.  Accepts graphs of the shape
//   mu_k ~ normal(mu0, sigma0)            (continuous, unconditional)
//   u_n  ~ uniform(0, 1)                  (discontinuous, unconditional)
//   y_n | u_n < c  ~ normal(mu_a, s_a),  datum d_n
//   y_n | u_n >= c ~ normal(mu_b, s_b),  datum d_n
// with one predicate per data point, a shared threshold c, and a consistent
// branch-to-component mapping.  Returns nullopt on any structural mismatch —
// matching is by shape and classification, never by vertex names.
std::optional<GmmRecognition> match_gmm(const GraphModel& model);

// Renders a two-component spec as source in exactly the shape match_gmm
// recognizes: one uniform(0, 1) indicator per data point split at
// c = p0[0], component means bound as mu1/mu2.  Compiling the result and
// matching it recovers the spec.  Requires spec.K == 2.
std::string render_gmm_source(const GmmSpec& spec);

}  // namespace sppl
