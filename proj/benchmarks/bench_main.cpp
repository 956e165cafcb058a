#include <benchmark/benchmark.h>

#include "hotspot/cluster.hpp"
#include "hotspot/density.hpp"
#include "hotspot/geometry.hpp"
#include "hotspot/spatstat.hpp"
#include "hotspot/synthetic.hpp"

namespace {

using namespace hotspot;

PlanarPointSet scene(std::size_t n) { return PlanarPointSet(synthetic::city_scene(n, 42)); }

void BM_SpatialIndexRadiusQuery(benchmark::State& state) {
  const auto ps = scene(static_cast<std::size_t>(state.range(0)));
  const SpatialIndex index(ps, 100.0);
  std::size_t i = 0, found = 0;
  for (auto _ : state) {
    found += index.radius_query(ps.points()[i], 100.0).size();
    i = (i + 1) % ps.size();
  }
  benchmark::DoNotOptimize(found);
}
BENCHMARK(BM_SpatialIndexRadiusQuery)->Arg(10'000)->Arg(100'000);

void BM_DensityProfile(benchmark::State& state) {
  const auto ps = scene(static_cast<std::size_t>(state.range(0)));
  const double beta = scott_bandwidth(ps);
  for (auto _ : state) benchmark::DoNotOptimize(density_profile(ps, beta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DensityProfile)->Arg(5'000)->Arg(20'000)->Unit(benchmark::kMillisecond);

void BM_RescaledNeighborGraph(benchmark::State& state) {
  const auto ps = scene(static_cast<std::size_t>(state.range(0)));
  const auto profile = density_profile(ps, scott_bandwidth(ps));
  const auto factors = density_factors(profile, {adaptive_steepness(profile)});
  for (auto _ : state) benchmark::DoNotOptimize(NeighborGraph::from_rescaled_points(ps, factors, 100.0));
}
BENCHMARK(BM_RescaledNeighborGraph)->Arg(10'000)->Arg(50'000)->Unit(benchmark::kMillisecond);

void BM_Dbscan(benchmark::State& state) {
  const auto ps = scene(static_cast<std::size_t>(state.range(0)));
  const auto graph = NeighborGraph::from_points(ps, 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(graph, 20));
}
BENCHMARK(BM_Dbscan)->Arg(50'000)->Unit(benchmark::kMillisecond);

void BM_PairCount(benchmark::State& state) {
  const Window w{0, 0, 5'000, 5'000};
  const auto n = static_cast<std::size_t>(state.range(0));
  const PlanarPointSet d(synthetic::csr(w, n, 1), {}, w);
  const PlanarPointSet r(synthetic::csr(w, n, 2), {}, w);
  const auto grid = RadiiGrid::uniform(10.0, 1'000.0);
  for (auto _ : state) benchmark::DoNotOptimize(pair_count(d, r, grid));
}
BENCHMARK(BM_PairCount)->Arg(2'000)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
