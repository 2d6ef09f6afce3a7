// Hot-path costs of the compiled density: full evaluations, gradients, and
// predicate snapshots on the two-component mixture benchmark model.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sppl/boundary.hpp"
#include "sppl/density.hpp"
#include "sppl/gmm_match.hpp"
#include "sppl/graph.hpp"
#include "sppl/oracle.hpp"
#include "sppl/parser.hpp"
#include "sppl/validate.hpp"

namespace {

struct Fixture {
  sppl::GraphModel model;
  sppl::PiecewiseDensity pd;
  std::vector<double> state;

  Fixture()
      : model(sppl::compile(sppl::validate(
            sppl::parse(sppl::render_gmm_source(sppl::GmmSpec::benchmark()))))),
        pd(sppl::build_density(model)) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (const auto& name : pd.coords()) {
      const bool disc =
          model.coord_class.at(name) == sppl::CoordClass::discontinuous;
      state.push_back(disc ? unit(gen) : norm(gen));
    }
  }
};

void BM_LogDensity(benchmark::State& bench_state) {
  Fixture f;
  for (auto _ : bench_state) {
    benchmark::DoNotOptimize(f.pd.log_density(f.state));
  }
}
BENCHMARK(BM_LogDensity);

void BM_GradLogDensity(benchmark::State& bench_state) {
  Fixture f;
  std::vector<double> grad(f.pd.dim());
  for (auto _ : bench_state) {
    benchmark::DoNotOptimize(f.pd.grad_log_density(f.state, grad));
  }
}
BENCHMARK(BM_GradLogDensity);

void BM_PredicateSnapshot(benchmark::State& bench_state) {
  Fixture f;
  std::vector<std::uint8_t> bits;
  for (auto _ : bench_state) {
    f.pd.predicate_bits(f.state, bits);
    benchmark::DoNotOptimize(bits.data());
  }
}
BENCHMARK(BM_PredicateSnapshot);

}  // namespace

BENCHMARK_MAIN();
