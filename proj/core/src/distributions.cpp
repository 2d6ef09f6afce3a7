#include "sppl/distributions.hpp"

#include <cmath>
#include <limits>

namespace sppl {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2
}  // namespace

double logpdf_normal(double x, double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(x) || !std::isfinite(mu) ||
      !std::isfinite(sigma)) {
    return kNegInf;
  }
  const double z = (x - mu) / sigma;
  return -kHalfLog2Pi - std::log(sigma) - 0.5 * z * z;
}

double logpdf_uniform(double x, double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(x) || !std::isfinite(lo) || !std::isfinite(hi)) {
    return kNegInf;
  }
  if (x < lo || x >= hi) return kNegInf;
  return -std::log(hi - lo);
}

}  // namespace sppl
