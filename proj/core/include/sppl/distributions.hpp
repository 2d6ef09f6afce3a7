#pragma once

namespace sppl {

// Log densities of the two continuous primitives.  Both are total: invalid
// parameters (sigma <= 0, hi <= lo, non-finite anything) and points outside
// the support return -infinity rather than throwing, so samplers can treat
// any proposed state uniformly through the MH ratio.

// N(mu, sigma), sigma is the standard deviation.
double logpdf_normal(double x, double mu, double sigma);

// U[lo, hi); density -log(hi - lo) inside the support.
double logpdf_uniform(double x, double lo, double hi);

}  // namespace sppl
