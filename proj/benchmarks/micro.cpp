#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wcdrs/bench.hpp"
#include "wcdrs/convex_set.hpp"
#include "wcdrs/hedging.hpp"
#include "wcdrs/phase_retrieval.hpp"

using namespace wcdrs;

namespace {

Vector unit_start(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(n);
  for (Index j = 0; j < n; ++j) x(j) = normal(rng);
  return x.normalized();
}

void BM_ProxPhaseTerm(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const Vector a = unit_start(n, 1) * 3.0, c = unit_start(n, 2);
  Vector out(n);
  const auto sz = static_cast<std::size_t>(n);
  for (auto _ : state) {
    phase::prox_phase_term({a.data(), sz}, a.squaredNorm(), 1.3, 0.05, {c.data(), sz}, {out.data(), sz});
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ProxPhaseTerm)->Arg(10)->Arg(100);

void BM_ProjectConsensus(benchmark::State& state) {
  const auto N = static_cast<Index>(state.range(0));
  const std::vector<double> p(static_cast<std::size_t>(N), 1.0 / static_cast<double>(N));
  const Vector x = unit_start(N * 10, 3);
  for (auto _ : state) benchmark::DoNotOptimize(project_consensus(x, p));
}
BENCHMARK(BM_ProjectConsensus)->Arg(30)->Arg(300);

void BM_PhStep(benchmark::State& state) {
  const auto N = static_cast<Index>(state.range(0));
  const auto pb = phase::to_scenario_problem(phase::generate_instance(N, 10, 9));
  const double gamma = 0.99 * 0.5 / (2 * pb.mu());
  auto st = ph_start(pb, gamma, pb.lift(unit_start(10, 4)));
  for (auto _ : state) {
    st = ph_step(pb, gamma, 1.5, st);
    benchmark::DoNotOptimize(st.x.data());
  }
}
BENCHMARK(BM_PhStep)->Arg(30)->Arg(300);

// Fast runner cost per iteration, with no early stop.
void BM_RunDr(benchmark::State& state) {
  const auto N = static_cast<int>(state.range(0));
  const auto inst = phase::generate_instance(N, 10, 9);
  const double mu = std::sqrt(static_cast<double>(N)) / 2;
  bench::RunSettings settings;
  settings.max_iter = 100;
  settings.target_accuracy = -1.0;
  const Vector x0 = unit_start(10, 5);
  for (auto _ : state) benchmark::DoNotOptimize(bench::run_dr(inst, x0, 1.5, 0.99 * 0.5 / (2 * mu), mu, settings));
  state.SetItemsProcessed(state.iterations() * settings.max_iter);
}
BENCHMARK(BM_RunDr)->Arg(30)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
