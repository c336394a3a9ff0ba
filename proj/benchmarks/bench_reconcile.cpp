#include <benchmark/benchmark.h>

#include <random>

#include "htsrec/covariance.hpp"
#include "htsrec/hierarchy.hpp"
#include "htsrec/reconcile.hpp"

using namespace htsrec;

namespace {

Eigen::MatrixXd random_spd(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
  return a * a.transpose() + 0.3 * n * Eigen::MatrixXd::Identity(n, n);
}

Hierarchy sized_hierarchy(int n_u, int n_b) {
  Hierarchy h;
  h.aggregation = Eigen::MatrixXd::Zero(n_u, n_b);
  h.aggregation.row(0).setOnes();
  for (int j = 0; j < n_b; ++j)
    if (n_u > 1) h.aggregation(j % (n_u - 1) + 1, j) = 1.0;
  for (int i = 0; i < n_u; ++i) h.labels_upper.push_back("U" + std::to_string(i));
  for (int j = 0; j < n_b; ++j) h.labels_bottom.push_back("B" + std::to_string(j));
  return h;
}

}  // namespace

static void BM_Mint(benchmark::State& state) {
  const int n_u = static_cast<int>(state.range(0));
  const int n_b = static_cast<int>(state.range(1));
  const Hierarchy h = sized_hierarchy(n_u, n_b);
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd w = random_spd(gen, n_u + n_b);
  Eigen::VectorXd y_hat(n_u + n_b);
  for (int i = 0; i < y_hat.size(); ++i) y_hat(i) = static_cast<double>(gen() % 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mint(h, y_hat, w));
  }
}
BENCHMARK(BM_Mint)->Args({1, 26})->Args({8, 76})->Args({29, 76});

static void BM_TRec(benchmark::State& state) {
  const int n_u = static_cast<int>(state.range(0));
  const int n_b = static_cast<int>(state.range(1));
  const Hierarchy h = sized_hierarchy(n_u, n_b);
  std::mt19937_64 gen(2);
  const IWParams post{random_spd(gen, n_u + n_b), 5.0 * (n_u + n_b)};
  Eigen::VectorXd y_hat(n_u + n_b);
  for (int i = 0; i < y_hat.size(); ++i) y_hat(i) = static_cast<double>(gen() % 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trec(h, y_hat, post));
  }
}
BENCHMARK(BM_TRec)->Args({1, 26})->Args({8, 76})->Args({29, 76});

BENCHMARK_MAIN();
