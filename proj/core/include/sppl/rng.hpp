#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace sppl {

// Deterministic random stream.  The generator is mt19937_64, but every
// variate is derived here from raw 64-bit draws rather than through
// std::*_distribution, whose output sequences are implementation-defined.
// Two builds on any platform therefore produce identical chains from the
// same (seed, chain index).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  // Stream for one chain of a run: the generator seed is splitmix64 applied
  // to the run seed and chain index, so neighboring chains are uncorrelated
  // even for adjacent run seeds.
  static RandomStream for_chain(std::uint64_t run_seed, std::uint64_t chain) {
    return RandomStream(mix(run_seed + 0x9e3779b97f4a7c15ull * (chain + 1)));
  }

  std::uint64_t raw() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * kInv53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box–Muller, no caching: exactly two uniforms per
  // call, so consumption is easy to reason about in bitwise-replay tests.
  double normal() {
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * kPi * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // Laplace with scale b via inverse CDF.
  double laplace(double b) {
    const double u = uniform01() - 0.5;
    const double s = u < 0.0 ? -1.0 : 1.0;
    return -b * s * std::log(1.0 - 2.0 * std::abs(u));
  }

  // Uniform integer in [0, n); n must be positive.  Rejection-free modulo
  // reduction would bias large n; use rejection from the top range instead.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  // Fisher–Yates; deterministic given the stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  static std::uint64_t mix(std::uint64_t x) {  // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

 private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  static constexpr double kPi = 3.14159265358979323846;

  std::mt19937_64 gen_;
};

}  // namespace sppl
