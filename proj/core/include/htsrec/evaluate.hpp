#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "htsrec/covariance.hpp"
#include "htsrec/hierarchy.hpp"
#include "htsrec/reconcile.hpp"
#include "htsrec/scoring.hpp"

namespace htsrec {

/// Rolling-origin layout: each origin trains on a contiguous window and
/// forecasts the point immediately after it; test points are distinct and end
/// at the last observation.
struct RollingOriginPlan {
  int total_length = 0;
  int train_length = 0;
  int origin_count = 0;
  int step = 1;

  struct Origin {
    int window_begin = 0;
    int window_end = 0;  // exclusive; the test point
    int test_point = 0;
  };

  std::vector<Origin> origins() const;  // validates the layout
};

/// Point forecast for the next step plus the in-sample one-step residuals
/// that feed covariance estimation.
struct BaseForecastFit {
  Eigen::VectorXd point;
  ResidualMatrix residuals;  // n x T', forecast minus actual
};

/// Built-in base forecaster: per-series additive exponential smoothing
/// (level, trend, and - when the window covers two seasonal cycles - seasonal
/// states) with smoothing weights grid-tuned per series by in-sample SSE.
/// The independent per-series fits make the point forecasts genuinely
/// incoherent, as independently fitted models are.
BaseForecastFit fit_base_forecaster(const Eigen::MatrixXd& window,
                                    int season_length);

/// Directory of externally produced base forecasts, one pair of files per
/// origin keyed by test-point index: mean_<t>.csv (series,mean) and
/// residuals_<t>.csv (time column plus one column per series).
struct ExternalBaseForecasts {
  std::string directory;
};

struct EvaluateConfig {
  std::vector<Method> methods;
  int train_length = 0;
  int origin_count = 0;
  int step = 1;
  int season_length = 12;
  int es_samples = 2000;
  std::uint64_t seed = 0;
  std::optional<double> nu0_override;
  bool prior_diag = false;
  bool center_residuals = false;
  int threads = 1;
};

struct EvaluationOutcome {
  ScoreReport report;
  EvaluationRun run;  // raw per-origin records
  std::vector<int> skipped_origins;
};

/// Runs the full rolling-origin pipeline: per origin, fit the base forecaster
/// (or load the external one), estimate the covariance and prior from the
/// origin's residual window, reconcile with every requested method, and score
/// against the realized value. Origins with insufficient history are skipped
/// and recorded in the report warnings.
EvaluationOutcome run_rolling_evaluation(
    const Hierarchy& h, const Eigen::MatrixXd& data, const EvaluateConfig& config,
    const ExternalBaseForecasts* external = nullptr);

}  // namespace htsrec
