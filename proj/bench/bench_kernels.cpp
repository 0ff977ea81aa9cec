// Serial reference against OpenMP kernels on the same inputs.
#include <benchmark/benchmark.h>

#include "orbi/counterexamples.hpp"
#include "orbi/kernels.hpp"
#include "orbi/map_expr.hpp"
#include "orbi/region.hpp"

namespace {

using namespace orbi;

Region bench_region() {
  return Region::finite_union({Region::annulus(2, 0.3, 0.8),
                               Region::sector(0.2, 1.5, 0.5, 2.0),
                               Region::ball(Eigen::Vector2d(1, 1), 0.4)});
}

template <auto Kernel>
void grid_membership(benchmark::State& state) {
  Region r = bench_region();
  GridSpec grid = make_grid(r, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(r, grid));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.size()));
}

struct MatchInput {
  FiniteMatrixGroup group = rotation_group(12);
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> images;

  explicit MatchInput(std::size_t n) {
    points = sample_region(Region::ball(Eigen::VectorXd::Zero(2), 2), n, 1);
    for (std::size_t i = 0; i < n; ++i) images.push_back(group.real_element(i % group.order()) * points[i]);
  }
};

template <auto Kernel>
void match_elements(benchmark::State& state) {
  MatchInput in(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.group, in.points, in.images, 1e-9));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * in.points.size()));
}

template <auto Kernel>
void equivariance_error(benchmark::State& state) {
  MatchInput in(static_cast<std::size_t>(state.range(0)));
  MapExpr f = example2_map();
  RealMap fn = f.as_function();
  std::vector<std::size_t> hom(in.group.order());
  for (std::size_t i = 0; i < hom.size(); ++i) hom[i] = i;
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(fn, in.group, in.group, hom, in.points));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * in.points.size() * in.group.order()));
}

BENCHMARK(grid_membership<kernels::serial::grid_membership>)->Name("grid_membership/serial")->Arg(64)->Arg(256);
BENCHMARK(grid_membership<kernels::parallel::grid_membership>)->Name("grid_membership/parallel")->Arg(64)->Arg(256);
BENCHMARK(match_elements<kernels::serial::match_elements>)->Name("match_elements/serial")->Arg(1000)->Arg(20000);
BENCHMARK(match_elements<kernels::parallel::match_elements>)->Name("match_elements/parallel")->Arg(1000)->Arg(20000);
BENCHMARK(equivariance_error<kernels::serial::equivariance_error>)->Name("equivariance_error/serial")->Arg(500)->Arg(5000);
BENCHMARK(equivariance_error<kernels::parallel::equivariance_error>)->Name("equivariance_error/parallel")->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
