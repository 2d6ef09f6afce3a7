#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sppl {

// A univariate Gaussian mixture with conjugate N(mu0, sigma0^2) priors on
// the component means, known component noise scales, and fixed weights.
struct GmmSpec {
  int K = 2;
  double mu0 = 0.0;
  double sigma0 = 2.0;
  std::vector<double> sigma_obs;  // per component
  std::vector<double> p0;         // component weights, sum to 1
  std::vector<double> data;

  // The 10-point, two-component benchmark instance used across tests.
  static GmmSpec benchmark();
};

// Exact posterior by assignment enumeration: K^N assignments, each with a
// closed-form Gaussian posterior per component mean.  Enumeration is the
// independent ground truth the samplers are judged against.
struct ExactPosterior {
  int K = 0;
  std::size_t n_assignments = 0;
  std::vector<double> log_weights;  // normalized, assignment-major
  std::vector<double> post_mean;    // n_assignments x K, flattened
  std::vector<double> post_var;     // same layout
  std::vector<double> cluster_mean; // E[mu_k]
  double min_mean = 0.0;            // E[min_k mu_k]
  double max_mean = 0.0;            // E[max_k mu_k]
  double predictive_mean = 0.0;     // sum_k p0[k] E[mu_k]
};

// Throws SpplError(kind="oracle") when K^N exceeds 10^7, on invalid
// parameters, and for K > 2 (min/max of dependent Gaussians has no closed
// form there; the enumeration is only wired up for the sizes the tests use).
ExactPosterior gmm_exact(const GmmSpec& spec);

enum class Functional { min_mean, max_mean, predictive_mean };
Functional functional_from_name(const std::string& name);  // throws on unknown
const char* functional_name(Functional f);
double functional_truth(const ExactPosterior& post, Functional f);

// Per-draw value of the functional: row-wise min/max over the mean columns,
// or the p0-weighted average for predictive_mean.  `samples` is row-major
// with `width` columns; `mean_cols` picks the component-mean columns in
// component order.
std::vector<double> functional_series(std::span<const double> samples,
                                      std::size_t width,
                                      const std::vector<std::size_t>& mean_cols,
                                      const std::vector<double>& p0,
                                      Functional f);

// Squared error of the running mean of `series` against `truth`, reported at
// each sample count in `ns` (ascending).
std::vector<std::pair<std::size_t, double>> mse_trace(
    std::span<const double> series, double truth,
    std::span<const std::size_t> ns);

// Pointwise median and 20%/80% quantiles across traces sharing the same ns.
struct MseBand {
  std::size_t n = 0;
  double median = 0.0;
  double q20 = 0.0;
  double q80 = 0.0;
};
std::vector<MseBand> aggregate_traces(
    const std::vector<std::vector<std::pair<std::size_t, double>>>& traces);

}  // namespace sppl
