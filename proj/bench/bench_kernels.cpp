// OpenMP kernels against their serial references.
//
//   sgpl_bench --benchmark_filter=knn

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sgpl/dgp.hpp"
#include "sgpl/hexgrid.hpp"
#include "sgpl/reference.hpp"

namespace {

std::vector<sgpl::Point2> points(std::size_t n) {
  sgpl::Rng rng(n);
  return sgpl::gen_points_uniform(n, rng);
}

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(n + 1);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

void BM_assign_all(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgpl::assign_all(sgpl::GridSpec{}, pts));
}

void BM_assign_all_serial(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgpl::reference::assign_all(sgpl::GridSpec{}, pts));
}

void BM_knn(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgpl::knn_weights(pts, 4));
}

// All-pairs sort; kept to small n.
void BM_knn_serial(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgpl::reference::knn_weights(pts, 4));
}

void BM_spmv(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = sgpl::knn_weights(points(n), 4);
  const auto v = noise(n);
  std::vector<double> out(n);
  for (auto _ : state) {
    sgpl::spmv(w, v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_spmv_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = sgpl::knn_weights(points(n), 4);
  const auto v = noise(n);
  std::vector<double> out(n);
  for (auto _ : state) {
    sgpl::reference::spmv(w, v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_neumann(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = sgpl::knn_weights(points(n), 4);
  const auto eps = noise(n);
  for (auto _ : state) benchmark::DoNotOptimize(sgpl::neumann_apply(w, 0.7, 50, eps));
}

void BM_neumann_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = sgpl::knn_weights(points(n), 4);
  const auto eps = noise(n);
  for (auto _ : state) benchmark::DoNotOptimize(sgpl::reference::neumann_apply(w, 0.7, 50, eps));
}

}  // namespace

BENCHMARK(BM_assign_all)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_assign_all_serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_knn)->Arg(2000)->Arg(25000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_knn_serial)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_spmv)->Arg(25000)->Arg(250000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_spmv_serial)->Arg(25000)->Arg(250000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_neumann)->Arg(25000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_neumann_serial)->Arg(25000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
