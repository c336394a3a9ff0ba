#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htsrec/reconcile.hpp"
#include "htsrec/scoring.hpp"
#include "htsrec/simulate.hpp"

namespace htsrec {

/// Replicated one-step experiment on the simulated minimal hierarchy: each
/// replication draws a fresh series, fits the base forecaster on the first
/// train_length points, reconciles with every method, and records interval
/// widths, incoherence, and scores at the held-out point.
struct SimStudyConfig {
  int replications = 1000;
  int train_length = 12;
  std::vector<Method> methods = {Method::mint, Method::trec};
  std::uint64_t seed = 0;
  int es_samples = 2000;
  int season_length = 4;
  SimConfig generator;  // length/seed are set per replication
  bool compute_scores = true;
  int threads = 1;
  std::optional<double> nu0_override;
};

struct SimStudyResult {
  std::vector<std::string> series;  // U, B1, B2
  /// Per method: replications x series matrices of reconciled-to-base
  /// prediction-interval width ratios.
  std::map<std::string, Eigen::MatrixXd> rel_width80;
  std::map<std::string, Eigen::MatrixXd> rel_width95;
  /// Per replication: |u_hat - b1_hat - b2_hat| / sqrt(Q') from the posterior
  /// scale matrix (filled when trec runs).
  std::vector<double> scaled_incoherence;
  std::vector<double> nu0;  // chosen prior degrees of freedom per replication
  ScoreReport report;       // present when compute_scores is set
};

SimStudyResult run_simulation_study(const SimStudyConfig& config);

}  // namespace htsrec
