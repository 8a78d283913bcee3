#include <benchmark/benchmark.h>

#include <random>

#include "hwt/bounds.hpp"
#include "hwt/spectral.hpp"
#include "hwt/verify.hpp"

namespace {

hwt::DenseTensor gaussian(const hwt::TensorShape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<hwt::Complex> e(shape.size());
  for (auto& z : e) z = {g(rng), g(rng)};
  return hwt::DenseTensor(shape, std::move(e));
}

void BM_EinsteinProduct(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto a = gaussian(hwt::TensorShape::square({d, d}), rng);
  const auto b = gaussian(hwt::TensorShape::square({d, d}), rng);
  for (auto _ : state) benchmark::DoNotOptimize(hwt::einstein_product(a, b));
}
BENCHMARK(BM_EinsteinProduct)->Arg(2)->Arg(3)->Arg(4)->Arg(6);

void BM_KyFan(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const auto a = gaussian(hwt::TensorShape::square({d, d}), rng);
  for (auto _ : state) benchmark::DoNotOptimize(hwt::ky_fan_norm(a, 2));
}
BENCHMARK(BM_KyFan)->Arg(2)->Arg(3)->Arg(4)->Arg(6);

void BM_HermEig(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const auto h = hwt::sample_hermitian(hwt::TensorShape::square({d, d}), rng);
  for (auto _ : state) benchmark::DoNotOptimize(hwt::herm_eig(h));
}
BENCHMARK(BM_HermEig)->Arg(2)->Arg(4);

void BM_HansonWrightBound(benchmark::State& state) {
  hwt::BoundInputs in;
  in.n = 3;
  in.a = {0.0, 1.0, 0.5};
  in.k = 2;
  in.Theta = 6.0;
  in.theta = {3.0, 3.0};
  in.R_d = 1.0;
  in.R_c = 0.5;
  in.K = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
  in.diag_stats.assign(3, {0.3, 0.05});
  in.coupling_stats.assign(3, std::vector<hwt::SummandStats>(3, {0.1, 0.02}));
  for (auto _ : state) benchmark::DoNotOptimize(hwt::hanson_wright_bound(in));
}
BENCHMARK(BM_HansonWrightBound);

void BM_DominanceExperiment(benchmark::State& state) {
  hwt::DominanceConfig cfg;
  cfg.ensemble.base_shape = hwt::TensorShape::square({2});
  cfg.ensemble.n = 3;
  cfg.poly = {0.0, 1.0, 0.5};
  cfg.k = 2;
  cfg.Theta_grid = {1.0, 2.0, 4.0, 8.0};
  cfg.trials = static_cast<std::size_t>(state.range(0));
  cfg.pilot_trials = 200;
  cfg.master_seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(hwt::run_dominance_experiment(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DominanceExperiment)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
