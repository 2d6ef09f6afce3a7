#include "sppl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sppl/diagnostics.hpp"

namespace sppl::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(n - 1);
}

double batch_means_se(std::span<const double> xs, std::size_t n_batches) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  const std::size_t batch = n / std::max<std::size_t>(n_batches, 1);
  if (batch == 0 || n / batch < 2) {
    return std::sqrt(variance(xs) / static_cast<double>(std::max<std::size_t>(n, 1)));
  }
  const std::size_t b = n / batch;  // full batches only
  std::vector<double> means;
  means.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    means.push_back(mean(xs.subspan(i * batch, batch)));
  }
  return std::sqrt(variance(means) / static_cast<double>(b));
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw SpplError("stats", "KS statistic needs non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0) || !(alpha < 1.0) || n == 0 || m == 0) {
    throw SpplError("stats", "KS critical value needs 0 < alpha < 1 and n, m > 0");
  }
  // Asymptotic two-sample threshold: c(alpha) = sqrt(-ln(alpha/2) / 2),
  // e.g. 1.3581 at 5% and 1.6276 at 1%.
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double linreg_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw SpplError("stats", "slope needs two equal-length samples of size >= 2");
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw SpplError("stats", "quantile of an empty sample");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

double logsumexp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / 2.5066282746310002;  // sqrt(2*pi)
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730951);  // sqrt(2)
}

std::vector<std::size_t> log_spaced(std::size_t lo, std::size_t hi,
                                    std::size_t count) {
  if (lo == 0 || hi < lo || count == 0) {
    throw SpplError("stats", "log_spaced needs 1 <= lo <= hi and count > 0");
  }
  std::set<std::size_t> pts;
  pts.insert(lo);
  pts.insert(hi);
  const double llo = std::log(static_cast<double>(lo));
  const double lhi = std::log(static_cast<double>(hi));
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    pts.insert(static_cast<std::size_t>(
        std::llround(std::exp(llo + f * (lhi - llo)))));
  }
  return {pts.begin(), pts.end()};
}

double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace sppl::stats
