#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "htsrec/covariance.hpp"
#include "htsrec/distributions.hpp"
#include "htsrec/hierarchy.hpp"
#include "htsrec/scoring.hpp"

namespace htsrec {

/// Hierarchy file: JSON object with `labels_upper`, `labels_bottom`, and
/// `aggregation` (rows of 0/1 integers). Validation errors name the
/// offending row or label.
Hierarchy hierarchy_from_json(const std::string& text);
std::string hierarchy_to_json(const Hierarchy& h);
Hierarchy load_hierarchy(const std::string& path);

struct TimeSeriesData {
  std::vector<std::string> series;  // canonical [upper; bottom] order
  Eigen::MatrixXd values;           // T_obs x n
};

/// Series CSV: first column a time index (integers or ISO dates, strictly
/// increasing), remaining columns one per hierarchy label in any order;
/// columns are reordered to the canonical order.
TimeSeriesData read_series_csv(const std::string& path, const Hierarchy& h);

void write_series_csv(const std::string& path,
                      const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& values);

struct Dataset {
  Hierarchy hierarchy;
  Eigen::MatrixXd values;  // T_obs x n, canonical order
};

Dataset ingest_dataset(const std::string& hierarchy_path,
                       const std::string& series_path);

/// Residuals CSV has the same layout as a series CSV; residual vectors become
/// columns of the returned n x T matrix.
ResidualMatrix read_residuals_csv(const std::string& path, const Hierarchy& h);

/// Base-forecast CSV: header `series,mean`, one row per hierarchy label.
Eigen::VectorXd read_base_forecast_csv(const std::string& path,
                                       const Hierarchy& h);

/// Serialized forecast distribution:
/// {"kind": "gaussian"|"mvt", "loc": [...], "scale": [[...]], "df": number?}.
std::string distribution_to_json(const ForecastDistribution& d);
ForecastDistribution distribution_from_json(const std::string& text);

/// Score report as JSON; `config_json`, when non-empty, is parsed and embedded
/// under "config" for reproducibility.
std::string report_to_json(const ScoreReport& report,
                           const std::string& config_json = "");

/// Tidy CSV: one row per method x metric (train_length column repeated).
std::string report_to_csv(const ScoreReport& report, int train_length);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace htsrec
