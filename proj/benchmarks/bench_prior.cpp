#include <benchmark/benchmark.h>

#include <random>

#include "htsrec/prior.hpp"

using namespace htsrec;

namespace {

struct LooInstance {
  Eigen::MatrixXd psi_mean;
  ResidualMatrix residuals;
};

LooInstance make_instance(int n, int t) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
  LooInstance instance;
  instance.psi_mean =
      a * a.transpose() + 0.5 * n * Eigen::MatrixXd::Identity(n, n);
  instance.residuals.values.resize(n, t);
  for (int j = 0; j < t; ++j)
    for (int i = 0; i < n; ++i) instance.residuals.values(i, j) = normal(gen);
  return instance;
}

}  // namespace

static void BM_LooObjective(benchmark::State& state) {
  const auto instance =
      make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const double nu = 2.0 * state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loo_log_score(instance.psi_mean, instance.residuals, nu));
  }
}
BENCHMARK(BM_LooObjective)->Args({10, 50})->Args({27, 60})->Args({111, 60});

static void BM_OptimizeNu0(benchmark::State& state) {
  const auto instance =
      make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_nu0(instance.psi_mean, instance.residuals));
  }
}
BENCHMARK(BM_OptimizeNu0)->Args({27, 60})->Args({111, 60})->Unit(benchmark::kMillisecond);
