#include <benchmark/benchmark.h>

#include <random>

#include "htsrec/distributions.hpp"
#include "htsrec/scoring.hpp"

using namespace htsrec;

static void BM_EnergyScore(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int samples = static_cast<int>(state.range(1));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
  const MultivariateGaussian d{
      Eigen::VectorXd::Zero(n),
      a * a.transpose() + 0.3 * n * Eigen::MatrixXd::Identity(n, n)};
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = normal(gen);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_score(ForecastDistribution{d}, y, samples, seed++));
  }
}
BENCHMARK(BM_EnergyScore)->Args({3, 2000})->Args({27, 2000})->Args({105, 2000})
    ->Unit(benchmark::kMillisecond);

static void BM_StudentTCrps(benchmark::State& state) {
  const UnivariateForecast f{MarginKind::student_t, 0.3, 1.4, 8.5};
  double y = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(crps(f, y));
    y += 1e-6;
  }
}
BENCHMARK(BM_StudentTCrps);
