#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "htsrec/distributions.hpp"

namespace htsrec {

/// Mean over origins of the squared Euclidean forecast error.
double mse(const std::vector<Eigen::VectorXd>& forecasts,
           const std::vector<Eigen::VectorXd>& actuals);

/// Interval score at miscoverage alpha (0.2 for 80%, 0.05 for 95%): interval
/// width plus 2/alpha times the distance by which the actual escapes it.
double mis(const UnivariateForecast& f, double y, double alpha);

/// Monte Carlo energy score with exponent 1: mean distance to the actual over
/// k draws minus half the mean distance between k/2 disjoint sample pairs.
double energy_score(const ForecastDistribution& d, const Eigen::VectorXd& y,
                    int samples, std::uint64_t seed);

double spearman_correlation(const std::vector<double>& x,
                            const std::vector<double>& y);

/// Forecasts issued at one rolling origin: the base distribution, one
/// distribution per reconciliation method, and the realized actual.
struct OriginRecord {
  ForecastDistribution base;
  std::map<std::string, ForecastDistribution> methods;
  Eigen::VectorXd actual;
};

struct EvaluationRun {
  std::vector<std::string> series;
  std::vector<OriginRecord> origins;
  int es_samples = 2000;
  std::uint64_t seed = 0;
};

struct MethodReport {
  double rel_mse = 1.0;
  double rel_crps = 1.0;
  double rel_mis80 = 1.0;
  double rel_mis95 = 1.0;
  double rel_es = 1.0;
  double coverage80 = 0.0;  // arithmetic mean across series
  double coverage95 = 0.0;
  double rel_width80 = 1.0;  // geometric mean across series and origins
  double rel_width95 = 1.0;
  double mse_value = 0.0;
  double es_sum = 0.0;
  std::vector<double> crps_series;
  std::vector<double> mis80_series;
  std::vector<double> mis95_series;
  std::vector<double> coverage80_series;
  std::vector<double> coverage95_series;
  std::vector<double> rel_width80_series;
  std::vector<double> rel_width95_series;
};

struct ScoreReport {
  std::vector<std::string> series;
  int origin_count = 0;
  MethodReport base;  // absolute scores; relative fields stay at 1
  std::map<std::string, MethodReport> methods;
  std::vector<std::string> warnings;
};

/// Relative scores against the base forecasts: RelMSE and RelES as ratios,
/// RelCRPS / RelMIS as geometric means of per-series ratios, coverage as the
/// arithmetic mean of per-series coverage rates. ES seeds derive from the run
/// seed and the origin index, so parallel evaluation replays exactly.
ScoreReport aggregate_report(const EvaluationRun& run);

}  // namespace htsrec
