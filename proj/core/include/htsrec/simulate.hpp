#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace htsrec {

/// Structural time-series generator for the minimal two-bottom hierarchy:
/// local linear trend + period-s seasonal + ARMA(1,1) errors with correlated
/// innovations. Initial states are standard normal draws (scaled by
/// init_scale); the ARMA component is burned in before recording.
struct SimConfig {
  int length = 12;
  int seasons = 4;
  double trend_level_var = 2.0;
  double trend_slope_var = 0.007;
  double seasonal_var = 7.0;
  double ar = 0.3;
  double ma = 0.5;
  Eigen::Matrix2d error_cov = (Eigen::Matrix2d() << 5.0, 3.0, 3.0, 4.0).finished();
  double init_scale = 1.0;
  int burn_in = 200;
  std::uint64_t seed = 0;
};

/// length x 2 matrix of bottom series. Deterministic for a fixed seed; the
/// trend, slope, seasonal, ARMA, and initial-state draws come from distinct
/// substreams of the seed.
Eigen::MatrixXd simulate_bottom(const SimConfig& config);

/// length x 3 matrix [U, B1, B2] with U = B1 + B2 exactly.
Eigen::MatrixXd simulate_hierarchy(const SimConfig& config);

}  // namespace htsrec
