#include <random>

#include <benchmark/benchmark.h>

#include "oplab/model_spaces.hpp"
#include "oplab/multiplicity.hpp"
#include "oplab/scenario.hpp"

using namespace oplab;

namespace {

Matrix random_columns(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Scalar(g(rng), g(rng));
  return m;
}

void BM_Orthonormalize(benchmark::State& state) {
  const Index n = state.range(0);
  Matrix cols = random_columns(n, n / 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(orthonormalize(cols).dim());
}
BENCHMARK(BM_Orthonormalize)->Arg(16)->Arg(64)->Arg(128);

void BM_KrylovClosure(benchmark::State& state) {
  const Index m = state.range(0);
  ShiftModel s = make_shift(SpaceKind::bergman(), m);
  OperatorTuple a({s.op});
  std::vector<Vector> g = {random_columns(m, 1, 2).col(0)};
  for (auto _ : state) benchmark::DoNotOptimize(krylov_closure(a, g).dim());
}
BENCHMARK(BM_KrylovClosure)->Arg(16)->Arg(64)->Arg(128);

void BM_RunScenario(benchmark::State& state, const char* file) {
  Scenario sc = load_scenario(std::filesystem::path(OPLAB_SCENARIO_DIR) / file);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(sc).all_passed());
}
BENCHMARK_CAPTURE(BM_RunScenario, hardy_2x2, "hardy-2x2.json")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunScenario, mixed_3, "mixed-3.json")->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
