#include "sppl/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "sppl/diagnostics.hpp"
#include "sppl/distributions.hpp"
#include "sppl/stats.hpp"

namespace sppl {

GmmSpec GmmSpec::benchmark() {
  GmmSpec s;
  s.K = 2;
  s.mu0 = 0.0;
  s.sigma0 = 2.0;
  s.sigma_obs = {1.0, 1.0};
  s.p0 = {0.5, 0.5};
  s.data = {-2.0, -2.5, -1.7, -1.9, -2.2, 1.5, 2.2, 3.0, 1.2, 2.8};
  return s;
}

namespace {

constexpr std::size_t kMaxAssignments = 10'000'000;

[[noreturn]] void fail(const std::string& msg) { throw SpplError("oracle", msg); }

// E[max(A, B)] for independent A ~ N(m1, v1), B ~ N(m2, v2); exact, and
// written so that swapping the arguments gives the bit-identical result.
double expected_max(double m1, double v1, double m2, double v2) {
  const double theta = std::sqrt(v1 + v2);
  if (theta == 0.0) return std::max(m1, m2);
  const double a = (m1 - m2) / theta;
  return m1 * stats::normal_cdf(a) + m2 * stats::normal_cdf(-a) +
         theta * stats::normal_pdf(a);
}

}  // namespace

ExactPosterior gmm_exact(const GmmSpec& spec) {
  const int K = spec.K;
  const std::size_t N = spec.data.size();
  if (K < 1) fail("component count must be at least 1");
  if (!(spec.sigma0 > 0.0)) fail("prior scale must be positive");
  if (spec.sigma_obs.size() != static_cast<std::size_t>(K)) {
    fail("need one observation scale per component");
  }
  for (double s : spec.sigma_obs) {
    if (!(s > 0.0)) fail("observation scales must be positive");
  }
  if (spec.p0.size() != static_cast<std::size_t>(K)) {
    fail("need one weight per component");
  }
  double wsum = 0.0;
  for (double p : spec.p0) {
    if (!(p > 0.0)) fail("component weights must be positive");
    wsum += p;
  }
  if (std::abs(wsum - 1.0) > 1e-9) fail("component weights must sum to 1");
  if (N == 0) fail("need at least one data point");
  if (K > 2) {
    fail("min/max functionals are only available for 1 or 2 components");
  }

  std::size_t n_assign = 1;
  for (std::size_t n = 0; n < N; ++n) {
    if (n_assign > kMaxAssignments / static_cast<std::size_t>(K)) {
      fail("assignment enumeration would exceed " +
           std::to_string(kMaxAssignments) + " terms");
    }
    n_assign *= static_cast<std::size_t>(K);
  }

  ExactPosterior post;
  post.K = K;
  post.n_assignments = n_assign;
  post.log_weights.resize(n_assign);
  post.post_mean.resize(n_assign * K);
  post.post_var.resize(n_assign * K);

  // Sequential predictive decomposition of log p(y, z): each point
  // contributes its predictive density under the running conjugate state of
  // its component, so no matrix algebra is needed and the result is exact.
  std::vector<int> z(N);
  std::vector<double> m(K), v(K);
  for (std::size_t idx = 0; idx < n_assign; ++idx) {
    std::size_t t = idx;
    for (std::size_t n = 0; n < N; ++n) {
      z[n] = static_cast<int>(t % K);
      t /= static_cast<std::size_t>(K);
    }
    std::fill(m.begin(), m.end(), spec.mu0);
    std::fill(v.begin(), v.end(), spec.sigma0 * spec.sigma0);
    double lw = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const int k = z[n];
      const double s2 = spec.sigma_obs[k] * spec.sigma_obs[k];
      lw += std::log(spec.p0[k]);
      lw += logpdf_normal(spec.data[n], m[k], std::sqrt(v[k] + s2));
      const double gain = v[k] / (v[k] + s2);
      m[k] += gain * (spec.data[n] - m[k]);
      v[k] = v[k] * s2 / (v[k] + s2);
    }
    post.log_weights[idx] = lw;
    for (int k = 0; k < K; ++k) {
      post.post_mean[idx * K + k] = m[k];
      post.post_var[idx * K + k] = v[k];
    }
  }

  // Normalization and every reduction below run through sorted sums, making
  // the numbers invariant to component relabeling — exactly, not just to
  // rounding — which the symmetry tests check for.
  double mx = post.log_weights[0];
  for (double lw : post.log_weights) mx = std::max(mx, lw);
  std::vector<double> terms(n_assign);
  for (std::size_t i = 0; i < n_assign; ++i) {
    terms[i] = std::exp(post.log_weights[i] - mx);
  }
  const double log_z = mx + std::log(stats::sorted_sum(terms));
  for (auto& lw : post.log_weights) lw -= log_z;

  post.cluster_mean.resize(K);
  for (int k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n_assign; ++i) {
      terms[i] = std::exp(post.log_weights[i]) * post.post_mean[i * K + k];
    }
    post.cluster_mean[k] = stats::sorted_sum(terms);
  }

  {
    std::vector<double> pterms(K);
    for (int k = 0; k < K; ++k) pterms[k] = spec.p0[k] * post.cluster_mean[k];
    post.predictive_mean = stats::sorted_sum(pterms);
  }

  if (K == 1) {
    post.min_mean = post.cluster_mean[0];
    post.max_mean = post.cluster_mean[0];
  } else {
    std::vector<double> max_terms(n_assign), min_terms(n_assign);
    for (std::size_t i = 0; i < n_assign; ++i) {
      const double w = std::exp(post.log_weights[i]);
      const double m1 = post.post_mean[i * K], v1 = post.post_var[i * K];
      const double m2 = post.post_mean[i * K + 1], v2 = post.post_var[i * K + 1];
      const double emax = expected_max(m1, v1, m2, v2);
      max_terms[i] = w * emax;
      min_terms[i] = w * ((m1 + m2) - emax);  // min = sum - max
    }
    post.max_mean = stats::sorted_sum(max_terms);
    post.min_mean = stats::sorted_sum(min_terms);
  }
  return post;
}

Functional functional_from_name(const std::string& name) {
  if (name == "min_mean") return Functional::min_mean;
  if (name == "max_mean") return Functional::max_mean;
  if (name == "predictive_mean") return Functional::predictive_mean;
  fail("unknown functional '" + name + "'");
}

const char* functional_name(Functional f) {
  switch (f) {
    case Functional::min_mean: return "min_mean";
    case Functional::max_mean: return "max_mean";
    case Functional::predictive_mean: return "predictive_mean";
  }
  return "?";
}

double functional_truth(const ExactPosterior& post, Functional f) {
  switch (f) {
    case Functional::min_mean: return post.min_mean;
    case Functional::max_mean: return post.max_mean;
    case Functional::predictive_mean: return post.predictive_mean;
  }
  fail("invalid functional");
}

std::vector<double> functional_series(std::span<const double> samples,
                                      std::size_t width,
                                      const std::vector<std::size_t>& mean_cols,
                                      const std::vector<double>& p0,
                                      Functional f) {
  if (width == 0 || samples.size() % width != 0) {
    fail("sample buffer is not a whole number of rows");
  }
  if (mean_cols.empty()) fail("need at least one mean column");
  for (std::size_t c : mean_cols) {
    if (c >= width) fail("mean column index out of range");
  }
  if (f == Functional::predictive_mean && p0.size() != mean_cols.size()) {
    fail("need one weight per mean column for the predictive functional");
  }

  const std::size_t rows = samples.size() / width;
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = samples.data() + r * width;
    if (f == Functional::predictive_mean) {
      double s = 0.0;
      for (std::size_t k = 0; k < mean_cols.size(); ++k) {
        s += p0[k] * row[mean_cols[k]];
      }
      out[r] = s;
    } else {
      double best = row[mean_cols[0]];
      for (std::size_t k = 1; k < mean_cols.size(); ++k) {
        const double x = row[mean_cols[k]];
        best = f == Functional::min_mean ? std::min(best, x) : std::max(best, x);
      }
      out[r] = best;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> mse_trace(
    std::span<const double> series, double truth,
    std::span<const std::size_t> ns) {
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) fail("sample counts must be strictly increasing");
  }
  if (!ns.empty() && (ns.front() == 0 || ns.back() > series.size())) {
    fail("sample counts must lie in [1, series length]");
  }
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(ns.size());
  double acc = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < series.size() && j < ns.size(); ++i) {
    acc += series[i];
    if (i + 1 == ns[j]) {
      const double err = acc / static_cast<double>(i + 1) - truth;
      out.emplace_back(ns[j], err * err);
      ++j;
    }
  }
  return out;
}

std::vector<MseBand> aggregate_traces(
    const std::vector<std::vector<std::pair<std::size_t, double>>>& traces) {
  if (traces.empty()) fail("no traces to aggregate");
  const std::size_t len = traces[0].size();
  for (const auto& t : traces) {
    if (t.size() != len) fail("traces disagree on the sample-count grid");
    for (std::size_t i = 0; i < len; ++i) {
      if (t[i].first != traces[0][i].first) {
        fail("traces disagree on the sample-count grid");
      }
    }
  }
  std::vector<MseBand> out(len);
  std::vector<double> col(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t t = 0; t < traces.size(); ++t) col[t] = traces[t][i].second;
    out[i].n = traces[0][i].first;
    out[i].median = stats::quantile(col, 0.5);
    out[i].q20 = stats::quantile(col, 0.2);
    out[i].q80 = stats::quantile(col, 0.8);
  }
  return out;
}

}  // namespace sppl
