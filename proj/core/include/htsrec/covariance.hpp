#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace htsrec {

/// In-sample one-step residuals, one column per time point, stacked in the
/// hierarchy's canonical series order. Residuals are forecast minus actual.
struct ResidualMatrix {
  Eigen::MatrixXd values;  // n x T

  Eigen::Index series_count() const { return values.rows(); }
  Eigen::Index count() const { return values.cols(); }

  void validate() const;  // finite entries, at least one column
};

/// Scale matrix and degrees of freedom of an Inverse-Wishart distribution.
struct IWParams {
  Eigen::MatrixXd psi;
  double nu = 0.0;

  Eigen::Index dim() const { return psi.rows(); }

  /// Checks symmetry (1e-12 relative), positive definiteness via Cholesky,
  /// and nu > dim - 1.
  void validate() const;
};

struct ShrinkageEstimate {
  Eigen::MatrixXd w_hat;
  double lambda = 0.0;
};

struct ShrinkageOptions {
  std::optional<double> lambda_override;
  bool center = false;  // diagnostics only; estimation treats means as zero
  std::vector<std::string> labels;  // optional, for error messages
};

/// Shrinks the sample second-moment matrix of the residuals toward its
/// diagonal. The intensity follows Schafer & Strimmer: the ratio of the
/// summed variance of the sample correlations to their summed squares,
/// clamped to [0, 1].
ShrinkageEstimate shrinkage_covariance(const ResidualMatrix& residuals,
                                       const ShrinkageOptions& options = {});

/// Conjugate update: (psi + R R^T, nu + T). The outer products are
/// accumulated column by column so that batched updates compose bit-exactly.
IWParams iw_posterior(const IWParams& prior, const ResidualMatrix& residuals);

struct RankOneDowndate {
  Eigen::MatrixXd inverse;
  double log_det = 0.0;
};

/// Inverse and log-determinant of M - r r^T from those of M, via the
/// Sherman-Morrison identity and the matrix determinant lemma. Fails when
/// 1 - r^T M^{-1} r falls below 1e-12, which signals a residual column that
/// dominates M.
RankOneDowndate sherman_morrison_downdate(const Eigen::MatrixXd& m_inverse,
                                          double log_det_m,
                                          const Eigen::VectorXd& r);

/// Mode of IW(psi, nu): psi / (nu + n + 1).
Eigen::MatrixXd iw_map(const IWParams& posterior);

/// (M + M^T) / 2; used after accumulations to suppress floating-point drift.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

/// Cholesky factor of an SPD matrix; throws a numerical error naming the
/// context when factorization fails.
Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m,
                                     const std::string& context);

}  // namespace htsrec
