#include <benchmark/benchmark.h>

#include <cmath>
#include <set>
#include <tuple>

#include "tgen/alias.hpp"
#include "tgen/assembly.hpp"
#include "tgen/graph.hpp"
#include "tgen/walker.hpp"

namespace {

using namespace tgen;

TemporalGraph make_graph(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TemporalEdge> edges;
  std::set<std::tuple<int, int, double>> seen;
  while (static_cast<int>(edges.size()) < m) {
    int u = static_cast<int>(rng.index(n));
    int v = static_cast<int>(rng.index(n));
    if (u == v) continue;
    double t = 1.0 + std::floor(rng.uniform() * 500.0);
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v, t}).second) continue;
    edges.push_back({u, v, t});
  }
  return TemporalGraph(n, std::move(edges));
}

void BM_AliasDraw(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) {
    x = rng.uniform() + 1e-3;
    total += x;
  }
  for (auto& x : p) x /= total;
  AliasTable table(p);
  for (auto _ : state) benchmark::DoNotOptimize(table.draw(rng));
}
BENCHMARK(BM_AliasDraw)->Arg(16)->Arg(1024)->Arg(65536);

void BM_WalkSampling(benchmark::State& state) {
  TemporalGraph g = make_graph(500, 5000, 11);
  WalkerConfig cfg;
  for (auto _ : state) {
    WalkSet ws = sample_walk_set(g, state.range(0), cfg, 3, 1);
    benchmark::DoNotOptimize(ws.walks.size());
  }
}
BENCHMARK(BM_WalkSampling)->Arg(1000)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_CountAndAssemble(benchmark::State& state) {
  TemporalGraph g = make_graph(500, 5000, 13);
  WalkerConfig cfg;
  WalkSet ws = sample_walk_set(g, state.range(0), cfg, 5, 1);
  CountOptions copt;
  copt.t_max = g.t_max();
  copt.truncate = true;
  for (auto _ : state) {
    AlphaCounts alpha = count_alpha(ws.walks, copt, 1);
    GeneratedGraph gg = assemble(alpha, g.num_nodes(), g.num_edges(), 17);
    benchmark::DoNotOptimize(gg.graph.num_edges());
  }
}
BENCHMARK(BM_CountAndAssemble)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
