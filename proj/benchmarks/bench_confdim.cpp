#include <benchmark/benchmark.h>

#include "confdim/resolution.hpp"
#include "confdim/sweep.hpp"
#include "confdim/visual_metric.hpp"

using namespace confdim;

namespace {

const PartitionFamily& carpet5() {
  static const PartitionFamily f = PartitionFamily::carpet(5);
  return f;
}

// Local problem of the corner cell 1.1 at level 2 + k.
LocalProblem carpet_problem(int k) {
  auto net = build_network(ProperSystem::cell_graph(1), carpet5(), 2 + k);
  return local_problem(net, carpet5(), Address{1, 1}, 0, 2, k);
}

void BM_delta(benchmark::State& st) {
  VisualMetric vm(WeightFunction::geometric(Rational(1, 3)), carpet5());
  auto pts = sample_points(carpet5(), 64, 5, 3, 0);
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(vm.delta(pts[i % 64], pts[(i + 1) % 64], static_cast<int>(st.range(0))));
    i += 2;
  }
}
BENCHMARK(BM_delta)->Arg(0)->Arg(2);

void BM_chain_distance(benchmark::State& st) {
  VisualMetric vm(WeightFunction::geometric(Rational(1, 3)), carpet5());
  auto pts = sample_points(carpet5(), 64, 7, 3, 0);
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(vm.chain_distance(pts[i % 64], pts[(i + 1) % 64], 1));
    i += 2;
  }
}
BENCHMARK(BM_chain_distance);

void BM_build_network(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(build_network(ProperSystem::cell_graph(1), carpet5(), static_cast<int>(st.range(0))));
}
BENCHMARK(BM_build_network)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_energy(benchmark::State& st) {
  auto P = carpet_problem(static_cast<int>(st.range(0)));
  double p = static_cast<double>(st.range(1)) / 10;
  for (auto _ : st) benchmark::DoNotOptimize(solve_energy({P.graph, P.U1, P.U2, p}));
  st.counters["vertices"] = P.graph.n;
}
BENCHMARK(BM_energy)->Args({2, 20})->Args({2, 30})->Args({3, 20})->Args({3, 15})->Unit(benchmark::kMillisecond);

void BM_modulus(benchmark::State& st) {
  auto P = carpet_problem(static_cast<int>(st.range(0)));
  ModulusOptions opt;
  opt.method = st.range(1) ? ModulusMethod::Potential : ModulusMethod::ConstraintGeneration;
  for (auto _ : st) benchmark::DoNotOptimize(solve_modulus(P.graph, P.U1, P.U2, 2.0, opt));
  st.counters["vertices"] = P.graph.n;
}
BENCHMARK(BM_modulus)->Args({1, 0})->Args({1, 1})->Args({2, 1})->Unit(benchmark::kMillisecond);

void BM_minimal_scan(benchmark::State& st) {
  int L = static_cast<int>(st.range(0));
  auto G = build_resolution(carpet5(), L);
  for (auto _ : st) benchmark::DoNotOptimize(horizontally_minimal_scan(G, L));
}
BENCHMARK(BM_minimal_scan)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_sweep(benchmark::State& st) {
  SweepConfig c;
  c.k_list = {1, 2};
  c.threads = 1;
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep(carpet5(), c));
}
BENCHMARK(BM_sweep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
