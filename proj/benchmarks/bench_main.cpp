#include "carnot/grid.hpp"
#include "carnot/group.hpp"
#include "carnot/regularize.hpp"
#include "carnot/testfn.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace carnot;

GroupPoint random_point(const CarnotGroup& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  GroupPoint p = GroupPoint::identity(g.dim());
  for (int i = 0; i < g.dim(); ++i) p[i] = U(rng);
  return p;
}

void BM_Multiply(benchmark::State& state, GroupPtr g) {
  std::mt19937_64 rng(1);
  const GroupPoint p = random_point(*g, rng);
  const GroupPoint q = random_point(*g, rng);
  for (auto _ : state) benchmark::DoNotOptimize(g->multiply(p, q));
}
BENCHMARK_CAPTURE(BM_Multiply, heisenberg, heisenberg(1));
BENCHMARK_CAPTURE(BM_Multiply, engel, engel());

void BM_Distance(benchmark::State& state, GroupPtr g) {
  std::mt19937_64 rng(2);
  const GroupPoint p = random_point(*g, rng);
  const GroupPoint q = random_point(*g, rng);
  for (auto _ : state) benchmark::DoNotOptimize(g->distance(p, q));
}
BENCHMARK_CAPTURE(BM_Distance, heisenberg, heisenberg(1));
BENCHMARK_CAPTURE(BM_Distance, engel, engel());

void BM_SupConvolution(benchmark::State& state) {
  const Grid grid(symmetric_box(heisenberg(1), 1.0), static_cast<int>(state.range(0)));
  const GridField u = sample(lookup_testfn(grid.group(), "nonconvex/sin_x1"), grid);
  const SupConvParams params = SupConvParams::make(0.1, u);
  for (auto _ : state) benchmark::DoNotOptimize(sup_convolution(u, params));
}
BENCHMARK(BM_SupConvolution)->Arg(9)->Arg(13)->Unit(benchmark::kMillisecond);

void BM_Mollify(benchmark::State& state) {
  const Grid grid(symmetric_box(heisenberg(1), 1.0), 13);
  const GridField u = sample(lookup_testfn(grid.group(), "convex/t_squared"), grid);
  const MollifierSpec spec = MollifierSpec::make(grid.group(), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(mollify(u, spec));
}
BENCHMARK(BM_Mollify)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
