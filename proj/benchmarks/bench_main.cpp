#include <benchmark/benchmark.h>

#include <memory>

#include "ringopt/adaptive.hpp"
#include "ringopt/ga.hpp"
#include "ringopt/graph.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/overlays.hpp"
#include "ringopt/parallel.hpp"
#include "ringopt/qlearn/network.hpp"
#include "ringopt/qlearn/trainer.hpp"

using namespace ringopt;

static void BM_Diameter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = gen_uniform(n, Seed{1});
  const auto topo = rapid_k_ring(n, DegreeBound::log2_ceil(n), Seed{2});
  for (auto _ : state) benchmark::DoNotOptimize(diameter(topo, w).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Diameter)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

static void BM_NearestNeighborRing(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = gen_gaussian(n, Seed{3});
  for (auto _ : state) benchmark::DoNotOptimize(nearest_neighbor_ring(w, 0));
}
BENCHMARK(BM_NearestNeighborRing)->Arg(256)->Arg(1024);

static void BM_Embed(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = gen_uniform(n, Seed{4});
  const auto params = qlearn::EmbedParams::random(qlearn::EmbedConfig{}, Seed{5});
  const auto partial = ring_topology(random_ring(n, Seed{6}));
  const qlearn::GraphView g{w, qlearn::latency_scale(w, params.config), partial};
  for (auto _ : state) benchmark::DoNotOptimize(qlearn::embed(g, params));
}
BENCHMARK(BM_Embed)->Arg(20)->Arg(100);

static void BM_GreedyConstruct(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = gen_uniform(n, Seed{7});
  const auto params = qlearn::EmbedParams::random(qlearn::EmbedConfig{}, Seed{8});
  for (auto _ : state) benchmark::DoNotOptimize(qlearn::greedy_construct(w, params, 0, DegreeBound(2)));
}
BENCHMARK(BM_GreedyConstruct)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_ParallelRing(benchmark::State& state) {
  const std::size_t n = 1024;
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto w = gen_uniform(n, Seed{9});
  const auto plan = parallel::make_partitions(n, m, Seed{10});
  const parallel::NearestNeighborSelector selector;
  for (auto _ : state) benchmark::DoNotOptimize(parallel::parallel_ring(w, plan, selector));
}
BENCHMARK(BM_ParallelRing)->Arg(1)->Arg(8)->Arg(32);

static void BM_Gossip(benchmark::State& state) {
  const std::size_t n = 256;
  const auto w = gen_gaussian(n, Seed{11});
  const auto topo = rapid_k_ring(n, DegreeBound::log2_ceil(n), Seed{12});
  const auto stats = adaptive::measure_all(topo, w, 8, Seed{13});
  for (auto _ : state) benchmark::DoNotOptimize(adaptive::gossip_aggregate(stats, topo, 40, Seed{14}));
}
BENCHMARK(BM_Gossip);

static void BM_GaGeneration(benchmark::State& state) {
  const auto w = gen_uniform(100, Seed{15});
  ga::GaConfig cfg;
  cfg.population = 20;
  cfg.budget = 40;
  for (auto _ : state) benchmark::DoNotOptimize(ga::ga_search(w, DegreeBound(3), cfg).best_diameter);
}
BENCHMARK(BM_GaGeneration)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
