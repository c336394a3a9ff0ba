#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace htsrec {

/// Aggregation structure of a hierarchical collection of series.
///
/// Series are kept in the fixed stacking order [upper; bottom]; every
/// block-partitioned formula downstream relies on it. The aggregation matrix
/// holds 0/1 entries, one row per upper series, and defines u = A b.
struct Hierarchy {
  Eigen::MatrixXd aggregation;  // n_u x n_b
  std::vector<std::string> labels_upper;
  std::vector<std::string> labels_bottom;

  Eigen::Index n_upper() const { return aggregation.rows(); }
  Eigen::Index n_bottom() const { return aggregation.cols(); }
  Eigen::Index size() const { return n_upper() + n_bottom(); }

  /// All labels in canonical [upper; bottom] order.
  std::vector<std::string> labels() const;

  /// Throws a validation error naming the offending row/label when the
  /// structure is inconsistent (non-binary entries, empty rows, duplicate or
  /// missing labels).
  void validate() const;

  /// One upper series equal to the sum of two bottom series.
  static Hierarchy minimal();
};

/// Summing matrix S = [A; I], n x n_b.
Eigen::MatrixXd summing_matrix(const Hierarchy& h);

/// u - A b for a stacked vector y = [u; b]; zero iff y is coherent.
Eigen::VectorXd coherence_residual(const Hierarchy& h, const Eigen::VectorXd& y);

}  // namespace htsrec
