// Per-step sampler costs on the two-component mixture benchmark model, plus
// the exact-enumeration reference posterior it is checked against.

#include <benchmark/benchmark.h>

#include "sppl/density.hpp"
#include "sppl/gmm_match.hpp"
#include "sppl/graph.hpp"
#include "sppl/oracle.hpp"
#include "sppl/parser.hpp"
#include "sppl/rng.hpp"
#include "sppl/samplers.hpp"
#include "sppl/validate.hpp"

namespace {

struct Fixture {
  sppl::GraphModel model;
  sppl::PiecewiseDensity pd;

  Fixture()
      : model(sppl::compile(sppl::validate(
            sppl::parse(sppl::render_gmm_source(sppl::GmmSpec::benchmark()))))),
        pd(sppl::build_density(model)) {}

  sppl::SamplerConfig config(sppl::Engine engine) const {
    sppl::SamplerConfig cfg;
    cfg.engine = engine;
    cfg.step_size = 0.05;
    cfg.leapfrog_steps = 10;
    cfg.seed = 11;
    return cfg;
  }
};

void run_steps(benchmark::State& bench_state, sppl::Engine engine) {
  Fixture f;
  sppl::Sampler sampler(f.model, f.pd, f.config(engine));
  sppl::RandomStream rng(f.config(engine).seed);
  std::vector<double> state = sampler.init_state(rng);
  for (auto _ : bench_state) {
    sppl::StepMeta meta = sampler.step(state, rng);
    benchmark::DoNotOptimize(meta.log_density);
  }
}

void BM_DhmcStep(benchmark::State& bench_state) {
  run_steps(bench_state, sppl::Engine::dhmc);
}
BENCHMARK(BM_DhmcStep);

void BM_MwgStep(benchmark::State& bench_state) {
  run_steps(bench_state, sppl::Engine::mwg);
}
BENCHMARK(BM_MwgStep);

void BM_ExactPosterior(benchmark::State& bench_state) {
  const sppl::GmmSpec spec = sppl::GmmSpec::benchmark();
  for (auto _ : bench_state) {
    benchmark::DoNotOptimize(sppl::gmm_exact(spec));
  }
}
BENCHMARK(BM_ExactPosterior);

}  // namespace

BENCHMARK_MAIN();
