#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "htsrec/covariance.hpp"

namespace htsrec {

struct BaselineForecaster {
  enum class Kind { naive, seasonal_naive };
  Kind kind = Kind::naive;
  int season_length = 1;  // used by seasonal_naive only
};

struct BaselineSelection {
  BaselineForecaster forecaster;
  bool short_history = false;  // fell back to naive because length < 3m
  double seasonal_acf = 0.0;   // lag-m autocorrelation of the differenced series
  double kpss_stat = 0.0;      // KPSS level statistic of the seasonal difference
};

/// Lag-l sample autocorrelation (mean-removed); 0 when the series is constant.
double autocorrelation(const Eigen::VectorXd& x, int lag);

/// KPSS level-stationarity statistic with Bartlett long-run variance,
/// bandwidth floor(4 (N/100)^{1/4}). Returns 0 for constant input.
double kpss_level_statistic(const Eigen::VectorXd& x);

/// Picks seasonal-naive when the first-differenced series shows lag-m
/// autocorrelation of at least 0.3 and the seasonally differenced series
/// passes the KPSS level test at the classic 5% critical value (0.463);
/// naive otherwise. Series shorter than 3m fall back to naive with the
/// short-history flag set.
BaselineSelection select_baseline(const Eigen::VectorXd& series, int m);

/// One-step in-sample residuals (forecast - actual) of the given baseline,
/// starting after its warm-up (1 for naive, m for seasonal naive).
Eigen::VectorXd baseline_residual_series(const Eigen::VectorXd& series,
                                         const BaselineForecaster& f);

/// Residual matrix of per-series baselines over the common time window
/// (columns aligned across series; warm-ups truncated to the longest).
ResidualMatrix baseline_residuals(const Eigen::MatrixXd& series,
                                  const std::vector<BaselineForecaster>& choices);

/// Same, selecting naive vs seasonal-naive per series via select_baseline.
ResidualMatrix baseline_residuals(const Eigen::MatrixXd& series, int m);

/// Prior mean of the error covariance: shrinkage estimate of the baseline
/// residual covariance.
Eigen::MatrixXd build_psi_mean(const ResidualMatrix& baseline_residuals,
                               const ShrinkageOptions& options = {});

struct PriorSpec {
  Eigen::MatrixXd psi_mean;
  double nu0 = 0.0;

  /// Scale matrix (nu0 - n - 1) * psi_mean.
  Eigen::MatrixXd psi0() const;
  IWParams to_iw() const { return {psi0(), nu0}; }
};

/// Leave-one-out log-score of the residuals under the Inverse-Wishart prior
/// with mean psi_mean and the given degrees of freedom. Evaluated with one
/// Cholesky factorization of psi0 + R R^T plus a rank-1 Sherman-Morrison
/// downdate per column; columns whose downdate is numerically singular fall
/// back to a direct factorization.
double loo_log_score(const Eigen::MatrixXd& psi_mean, const ResidualMatrix& r,
                     double nu);

struct Nu0Result {
  double nu0 = 0.0;
  double loo_score = 0.0;
  bool hit_lower = false;
  bool hit_upper = false;
};

/// Maximizes the LOO log-score over nu in [n+2, 5n] by a coarse scan followed
/// by golden-section refinement to |dnu| < 1e-3.
Nu0Result optimize_nu0(const Eigen::MatrixXd& psi_mean, const ResidualMatrix& r);

}  // namespace htsrec
