#include <doctest.h>

#include <cmath>
#include <random>

#include "htsrec/errors.hpp"
#include "htsrec/scoring.hpp"
#include "htsrec/special_math.hpp"
#include "oracles.hpp"

using namespace htsrec;

TEST_CASE("mse basics") {
  std::vector<Eigen::VectorXd> forecasts{Eigen::Vector2d(1, 2)};
  std::vector<Eigen::VectorXd> actuals{Eigen::Vector2d(1, 2)};
  CHECK(mse(forecasts, actuals) == 0.0);

  forecasts = {Eigen::Vector2d(3, 4)};
  actuals = {Eigen::Vector2d(0, 0)};
  CHECK(mse(forecasts, actuals) == 25.0);

  std::mt19937_64 gen(1);
  forecasts.clear();
  actuals.clear();
  double expected = 0.0;
  for (int i = 0; i < 7; ++i) {
    forecasts.push_back(oracles::random_vector(gen, 3));
    actuals.push_back(oracles::random_vector(gen, 3));
    expected += (forecasts.back() - actuals.back()).squaredNorm();
  }
  CHECK(mse(forecasts, actuals) == doctest::Approx(expected / 7.0).epsilon(1e-14));

  CHECK_THROWS_AS(mse({}, {}), Error);
}

TEST_CASE("interval score") {
  const UnivariateForecast f{MarginKind::gaussian, 0.0, 1.0, 0.0};
  const double q95 = norm_quantile(0.975);
  const double width = 2.0 * q95;

  CHECK(mis(f, 0.0, 0.05) == doctest::Approx(width).epsilon(1e-12));

  const double delta = 0.7;
  CHECK(mis(f, q95 + delta, 0.05) ==
        doctest::Approx(width + 40.0 * delta).epsilon(1e-12));

  CHECK(mis(f, 3.0, 0.05) ==
        doctest::Approx(2.0 * 1.959964 + 40.0 * (3.0 - 1.959964)).epsilon(1e-4));

  // MIS is never below the width, with equality only inside the interval.
  for (double y : {-5.0, -1.0, 0.0, 1.5, 4.0}) {
    const double score = mis(f, y, 0.2);
    const double w80 = interval_width(f, 0.8);
    CHECK(score >= w80 - 1e-12);
    const auto [lo, hi] = prediction_interval(f, 0.8);
    if (y >= lo && y <= hi) CHECK(score == doctest::Approx(w80));
    else CHECK(score > w80);
  }
}

TEST_CASE("energy score") {
  SUBCASE("point-mass limit is the distance to the actual") {
    Eigen::VectorXd loc(2);
    loc << 1.0, 2.0;
    MultivariateGaussian tiny{loc, 1e-20 * Eigen::MatrixXd::Identity(2, 2)};
    Eigen::VectorXd y(2);
    y << 4.0, 6.0;
    CHECK(energy_score(ForecastDistribution{tiny}, y, 1000, 5) ==
          doctest::Approx(5.0).epsilon(1e-6));
  }

  SUBCASE("replay determinism") {
    std::mt19937_64 gen(8);
    MultivariateGaussian d{oracles::random_vector(gen, 3), oracles::random_spd(gen, 3)};
    const Eigen::VectorXd y = oracles::random_vector(gen, 3);
    const double a = energy_score(ForecastDistribution{d}, y, 2000, 99);
    const double b = energy_score(ForecastDistribution{d}, y, 2000, 99);
    CHECK(a == b);
  }

  SUBCASE("propriety direction: truth scores better than a shifted actual") {
    std::mt19937_64 gen(12);
    MultivariateGaussian d{Eigen::VectorXd::Zero(2),
                           Eigen::MatrixXd::Identity(2, 2)};
    const Eigen::MatrixXd truths = sample(ForecastDistribution{d}, 200, 21);
    double at_truth = 0.0, at_shifted = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd y = truths.row(i).transpose();
      const Eigen::VectorXd shifted = y + 5.0 * Eigen::VectorXd::Ones(2);
      at_truth += energy_score(ForecastDistribution{d}, y, 500, 1000 + i);
      at_shifted += energy_score(ForecastDistribution{d}, shifted, 500, 1000 + i);
    }
    CHECK(at_truth < at_shifted);
  }

  SUBCASE("1-D energy score estimates the closed-form CRPS") {
    MultivariateGaussian d{Eigen::VectorXd::Constant(1, 0.5),
                           Eigen::MatrixXd::Identity(1, 1) * 2.25};
    const double y = -0.3;
    const double estimate = energy_score(ForecastDistribution{d},
                                         Eigen::VectorXd::Constant(1, y), 100000, 31);
    const UnivariateForecast f{MarginKind::gaussian, 0.5, 1.5, 0.0};
    CHECK(estimate == doctest::Approx(crps(f, y)).epsilon(0.02));
  }

  SUBCASE("odd sample counts are rejected") {
    MultivariateGaussian d{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
    CHECK_THROWS_AS(
        energy_score(ForecastDistribution{d}, Eigen::VectorXd::Zero(1), 3, 1),
        Error);
  }
}

TEST_CASE("spearman correlation") {
  CHECK(spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman_correlation({1, 2, 3, 4}, {5, 1, -2, -7}) == doctest::Approx(-1.0));
  // Monotone transform leaves ranks alone.
  CHECK(spearman_correlation({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) ==
        doctest::Approx(1.0));
}

namespace {

EvaluationRun toy_run(std::mt19937_64& gen, int origins, double method_scale) {
  EvaluationRun run;
  run.series = {"U", "B1"};
  run.seed = 42;
  run.es_samples = 200;
  for (int i = 0; i < origins; ++i) {
    OriginRecord record;
    const Eigen::VectorXd mean = oracles::random_vector(gen, 2);
    const Eigen::MatrixXd cov = oracles::random_spd(gen, 2);
    record.base = MultivariateGaussian{mean, cov};
    record.methods["m"] = MultivariateGaussian{mean, method_scale * cov};
    record.actual = mean + oracles::random_vector(gen, 2);
    run.origins.push_back(record);
  }
  return run;
}

}  // namespace

TEST_CASE("aggregate report: identical method scores exactly one") {
  std::mt19937_64 gen(17);
  const EvaluationRun run = toy_run(gen, 6, 1.0);
  const ScoreReport report = aggregate_report(run);
  const MethodReport& m = report.methods.at("m");
  CHECK(m.rel_mse == 1.0);
  CHECK(m.rel_crps == 1.0);
  CHECK(m.rel_mis80 == 1.0);
  CHECK(m.rel_mis95 == 1.0);
  CHECK(m.rel_es == 1.0);
  CHECK(m.rel_width80 == 1.0);
  CHECK(m.rel_width95 == 1.0);
}

TEST_CASE("aggregate report: geometric mean of reciprocal ratios is one") {
  // By the CRPS scaling identity, a method with the same standardized error
  // but sd ratio c scores exactly c times the base. Series A uses c = 0.5,
  // series B uses c = 2, so the geometric mean lands on 1.
  EvaluationRun run;
  run.series = {"A", "B"};
  run.es_samples = 100;
  OriginRecord record;
  const double z = 1.0;
  Eigen::VectorXd base_mean = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd actual(2);
  actual << z, z;
  Eigen::VectorXd method_mean(2);
  method_mean << z - z * 0.5, z - z * 2.0;
  Eigen::MatrixXd method_cov = Eigen::MatrixXd::Identity(2, 2);
  method_cov(0, 0) = 0.25;  // sd 0.5
  method_cov(1, 1) = 4.0;   // sd 2.0
  record.base = MultivariateGaussian{base_mean, Eigen::MatrixXd::Identity(2, 2)};
  record.methods["m"] = MultivariateGaussian{method_mean, method_cov};
  record.actual = actual;
  run.origins.push_back(record);
  const ScoreReport report = aggregate_report(run);
  const MethodReport& m = report.methods.at("m");
  CHECK(m.crps_series[0] / report.base.crps_series[0] ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.crps_series[1] / report.base.crps_series[1] ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.rel_crps == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("aggregate report matches an independent recomputation") {
  std::mt19937_64 gen(23);
  const EvaluationRun run = toy_run(gen, 5, 1.3);
  const ScoreReport report = aggregate_report(run);
  const MethodReport& m = report.methods.at("m");

  // Re-derive RelCRPS and coverage by direct loops.
  for (int series = 0; series < 2; ++series) {
    double crps_method = 0.0, crps_base = 0.0;
    int covered = 0;
    for (const auto& origin : run.origins) {
      const auto fm = marginal(origin.methods.at("m"), series);
      const auto fb = marginal(origin.base, series);
      crps_method += crps(fm, origin.actual(series));
      crps_base += crps(fb, origin.actual(series));
      const auto pi = prediction_interval(fm, 0.95);
      if (origin.actual(series) >= pi.first && origin.actual(series) <= pi.second)
        ++covered;
    }
    CHECK(m.crps_series[series] ==
          doctest::Approx(crps_method / 5.0).epsilon(1e-12));
    CHECK(m.coverage95_series[series] ==
          doctest::Approx(covered / 5.0).epsilon(1e-12));
  }
  const double rel_crps = std::sqrt(
      (m.crps_series[0] / report.base.crps_series[0]) *
      (m.crps_series[1] / report.base.crps_series[1]));
  CHECK(m.rel_crps == doctest::Approx(rel_crps).epsilon(1e-12));

  // Width ratio of same-mean gaussians is the sd ratio at every origin.
  CHECK(m.rel_width95 == doctest::Approx(std::sqrt(1.3)).epsilon(1e-12));
}

TEST_CASE("relative CRPS is invariant to a common rescaling") {
  std::mt19937_64 gen(29);
  EvaluationRun run = toy_run(gen, 4, 1.7);
  const double scale = 37.0;
  EvaluationRun scaled = run;
  for (auto& origin : scaled.origins) {
    auto& base = std::get<MultivariateGaussian>(origin.base);
    base.mean *= scale;
    base.cov *= scale * scale;
    auto& method = std::get<MultivariateGaussian>(origin.methods.at("m"));
    method.mean *= scale;
    method.cov *= scale * scale;
    origin.actual *= scale;
  }
  const double plain = aggregate_report(run).methods.at("m").rel_crps;
  const double rescaled = aggregate_report(scaled).methods.at("m").rel_crps;
  CHECK(plain == doctest::Approx(rescaled).epsilon(1e-12));
}

TEST_CASE("zero base score raises an undefined-ratio error naming the series") {
  EvaluationRun run;
  run.series = {"good", "flat"};
  run.es_samples = 100;
  OriginRecord record;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  record.base = MultivariateGaussian{mean, Eigen::MatrixXd::Identity(2, 2) * 1e-300};
  record.methods["m"] =
      MultivariateGaussian{mean, Eigen::MatrixXd::Identity(2, 2)};
  record.actual = mean;
  run.origins.push_back(record);
  CHECK_THROWS_AS(aggregate_report(run), Error);
}
