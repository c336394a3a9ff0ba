#include "htsrec/covariance.hpp"

#include <cmath>

#include "htsrec/errors.hpp"

namespace htsrec {

void ResidualMatrix::validate() const {
  if (values.cols() < 1)
    throw_insufficient("residuals: at least one column required");
  if (!values.allFinite())
    throw_validation("residuals: non-finite entries present");
}

void IWParams::validate() const {
  const Eigen::Index n = psi.rows();
  if (psi.cols() != n) throw_validation("iw: scale matrix must be square");
  const double scale = psi.cwiseAbs().maxCoeff();
  if ((psi - psi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw_validation("iw: scale matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(psi);
  if (llt.info() != Eigen::Success)
    throw_numerical("iw: scale matrix is not positive definite");
  if (!(nu > static_cast<double>(n) - 1.0))
    throw_validation("iw: degrees of freedom " + std::to_string(nu) +
                     " must exceed n - 1 = " + std::to_string(n - 1));
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m,
                                     const std::string& context) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw_numerical(context + ": matrix is not positive definite");
  return llt;
}

ShrinkageEstimate shrinkage_covariance(const ResidualMatrix& residuals,
                                       const ShrinkageOptions& options) {
  const Eigen::Index n = residuals.series_count();
  const Eigen::Index t = residuals.count();
  if (t < 2)
    throw_insufficient("shrinkage: need at least 2 residual columns, got " +
                       std::to_string(t));
  residuals.validate();

  Eigen::MatrixXd r = residuals.values;
  if (options.center) r.colwise() -= r.rowwise().mean();

  const Eigen::MatrixXd sample = symmetrize(r * r.transpose() / static_cast<double>(t));
  const Eigen::VectorXd variances = sample.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(variances(i) > 0.0)) {
      const std::string name = i < static_cast<Eigen::Index>(options.labels.size())
                                   ? options.labels[i]
                                   : "series " + std::to_string(i);
      throw_numerical("shrinkage: zero-variance residuals for " + name);
    }
  }

  double lambda;
  if (options.lambda_override) {
    lambda = *options.lambda_override;
    if (lambda < 0.0 || lambda > 1.0)
      throw_validation("shrinkage: lambda override must lie in [0,1]");
  } else {
    // Standardize rows, then estimate Var(correlation) from the per-time
    // products of standardized residuals (Schafer-Strimmer).
    const Eigen::VectorXd inv_sd = variances.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd x = inv_sd.asDiagonal() * r;
    double sum_var = 0.0;
    double sum_sq = 0.0;
    const double t_d = static_cast<double>(t);
    const double var_factor = t_d / ((t_d - 1.0) * (t_d - 1.0) * (t_d - 1.0));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double rho = sample(i, j) * inv_sd(i) * inv_sd(j);
        double ss = 0.0;
        for (Eigen::Index k = 0; k < t; ++k) {
          const double w = x(i, k) * x(j, k) - rho;
          ss += w * w;
        }
        sum_var += var_factor * ss;
        sum_sq += rho * rho;
      }
    }
    lambda = sum_sq > 0.0 ? std::min(1.0, std::max(0.0, sum_var / sum_sq)) : 1.0;
  }

  ShrinkageEstimate out;
  out.lambda = lambda;
  out.w_hat = lambda * Eigen::MatrixXd(variances.asDiagonal()) + (1.0 - lambda) * sample;
  out.w_hat = symmetrize(out.w_hat);
  return out;
}

IWParams iw_posterior(const IWParams& prior, const ResidualMatrix& residuals) {
  prior.validate();
  if (residuals.values.size() > 0 && residuals.series_count() != prior.dim())
    throw_validation("iw_posterior: residual dimension " +
                     std::to_string(residuals.series_count()) +
                     " does not match prior dimension " +
                     std::to_string(prior.dim()));
  if (residuals.count() > 0 && !residuals.values.allFinite())
    throw_validation("iw_posterior: non-finite residuals");

  IWParams post;
  post.psi = prior.psi;
  post.nu = prior.nu + static_cast<double>(residuals.count());
  // Column-wise rank-1 accumulation keeps two-batch updates bit-identical to
  // a single batch, and the mirrored triangle keeps psi exactly symmetric.
  for (Eigen::Index k = 0; k < residuals.count(); ++k) {
    const auto r = residuals.values.col(k);
    for (Eigen::Index i = 0; i < post.psi.rows(); ++i) {
      for (Eigen::Index j = i; j < post.psi.cols(); ++j) {
        const double v = r(i) * r(j);
        post.psi(i, j) += v;
        if (j != i) post.psi(j, i) += v;
      }
    }
  }
  return post;
}

RankOneDowndate sherman_morrison_downdate(const Eigen::MatrixXd& m_inverse,
                                          double log_det_m,
                                          const Eigen::VectorXd& r) {
  if (m_inverse.rows() != m_inverse.cols() || m_inverse.rows() != r.size())
    throw_validation("sherman_morrison_downdate: dimension mismatch");
  const Eigen::VectorXd mr = m_inverse * r;
  const double beta = 1.0 - r.dot(mr);
  if (beta <= 1e-12)
    throw_numerical(
        "sherman_morrison_downdate: 1 - r^T M^{-1} r = " + std::to_string(beta) +
        " (residual column dominates M)");
  RankOneDowndate out;
  out.inverse = m_inverse + (mr * mr.transpose()) / beta;
  out.log_det = log_det_m + std::log(beta);
  return out;
}

Eigen::MatrixXd iw_map(const IWParams& posterior) {
  posterior.validate();
  const double n = static_cast<double>(posterior.dim());
  return posterior.psi / (posterior.nu + n + 1.0);
}

}  // namespace htsrec
