#include "cavity/dynamics.hpp"
#include "cavity/model.hpp"

#include <benchmark/benchmark.h>

using namespace cavity;

namespace {

ModelParams params(std::size_t n) {
  return with_saturation(with_cooling_detuning(improved_point(n)), 0.1);
}

AtomConfiguration spread(std::size_t n) {
  AtomConfiguration c{Vector(static_cast<Eigen::Index>(n))};
  for (Eigen::Index k = 0; k < c.positions.size(); ++k) c.positions[k] = 0.1 + 0.37 * k;
  return c;
}

void BM_FieldResponse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelParams p = params(n);
  const AtomConfiguration c = spread(n);
  for (auto _ : state) benchmark::DoNotOptimize(field_response(p, c));
}
BENCHMARK(BM_FieldResponse)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_SampleKicks(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix d = field_response(params(n), spread(n)).diffusion;
  RandomStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_kicks(d, 1e-3, rng));
}
BENCHMARK(BM_SampleKicks)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_Step(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelParams p = params(n);
  const IntegratorConfig cfg = IntegratorConfig::for_trap(p, 1.0, 1);
  PhaseSpaceState s{0.0, spread(n).positions, Vector::Zero(static_cast<Eigen::Index>(n))};
  RandomStream rng(2);
  for (auto _ : state) {
    s = step(s, p, MixingWeights{}, cfg, rng).state;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Step)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
