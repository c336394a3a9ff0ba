#include "htsrec/reconcile.hpp"

#include <cmath>

#include "htsrec/errors.hpp"
#include "htsrec/prior.hpp"

namespace htsrec {

namespace {

void check_forecast(const Hierarchy& h, const Eigen::VectorXd& y_hat) {
  if (y_hat.size() != h.size())
    throw_validation("reconcile: forecast has " + std::to_string(y_hat.size()) +
                     " entries, hierarchy has " + std::to_string(h.size()));
  if (!y_hat.allFinite()) throw_validation("reconcile: non-finite base forecast");
}

// Shared pieces of the conditioning formulas: the constraint-violation scale
// Q, its Cholesky factor, and the gain G = psi_UB^T - psi_B A^T.
struct ConditioningBlocks {
  Eigen::MatrixXd gain;        // n_b x n_u
  Eigen::MatrixXd q;           // n_u x n_u
  Eigen::LLT<Eigen::MatrixXd> q_llt;
  Eigen::VectorXd d;           // A b_hat - u_hat
  Eigen::VectorXd q_inv_d;
};

ConditioningBlocks conditioning_blocks(const Hierarchy& h,
                                       const Eigen::VectorXd& y_hat,
                                       const Eigen::MatrixXd& psi,
                                       const std::string& context) {
  const Eigen::Index nu = h.n_upper();
  const Eigen::Index nb = h.n_bottom();
  const Eigen::MatrixXd& a = h.aggregation;

  const Eigen::MatrixXd psi_u = psi.topLeftCorner(nu, nu);
  const Eigen::MatrixXd psi_ub = psi.topRightCorner(nu, nb);
  const Eigen::MatrixXd psi_b = psi.bottomRightCorner(nb, nb);

  ConditioningBlocks blocks;
  blocks.gain = psi_ub.transpose() - psi_b * a.transpose();
  blocks.q = symmetrize(psi_u - psi_ub * a.transpose() - a * psi_ub.transpose() +
                        a * psi_b * a.transpose());
  blocks.q_llt = Eigen::LLT<Eigen::MatrixXd>(blocks.q);
  if (blocks.q_llt.info() != Eigen::Success)
    throw_numerical(context +
                    ": constraint-violation scale Q is not positive definite "
                    "(degenerate constraints)");
  blocks.d = a * y_hat.tail(nb) - y_hat.head(nu);
  blocks.q_inv_d = blocks.q_llt.solve(blocks.d);
  return blocks;
}

}  // namespace

MinTResult mint(const Hierarchy& h, const Eigen::VectorXd& y_hat,
                const Eigen::MatrixXd& w) {
  h.validate();
  check_forecast(h, y_hat);
  const Eigen::MatrixXd s = summing_matrix(h);

  const auto w_llt = cholesky(w, "mint");
  const Eigen::MatrixXd w_inv_s = w_llt.solve(s);                 // W^{-1} S
  const Eigen::MatrixXd m = symmetrize(s.transpose() * w_inv_s);  // S^T W^{-1} S
  const auto m_llt = cholesky(m, "mint: S^T W^{-1} S");

  MinTResult out;
  out.projection = m_llt.solve(w_inv_s.transpose());  // P = M^{-1} S^T W^{-1}
  const Eigen::VectorXd bottom_mean = out.projection * y_hat;
  const Eigen::MatrixXd bottom_cov =
      m_llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  out.full.mean = s * bottom_mean;
  out.full.cov = s * bottom_cov * s.transpose();
  return out;
}

MultivariateGaussian gaussian_conditioning(const Hierarchy& h,
                                           const Eigen::VectorXd& y_hat,
                                           const Eigen::MatrixXd& w) {
  h.validate();
  check_forecast(h, y_hat);
  const auto blocks = conditioning_blocks(h, y_hat, w, "gaussian_conditioning");
  const Eigen::MatrixXd s = summing_matrix(h);
  const Eigen::MatrixXd psi_b = w.bottomRightCorner(h.n_bottom(), h.n_bottom());

  const Eigen::VectorXd bottom_mean =
      y_hat.tail(h.n_bottom()) + blocks.gain * blocks.q_inv_d;
  const Eigen::MatrixXd bottom_cov = symmetrize(
      psi_b - blocks.gain * blocks.q_llt.solve(blocks.gain.transpose()));

  MultivariateGaussian out;
  out.mean = s * bottom_mean;
  out.cov = s * bottom_cov * s.transpose();
  return out;
}

MultivariateT incoherent_predictive(const IWParams& posterior,
                                    const Eigen::VectorXd& y_hat) {
  posterior.validate();
  const double n = static_cast<double>(posterior.dim());
  const double df = posterior.nu - n + 1.0;
  if (!(df > 0.0))
    throw_numerical("incoherent_predictive: nu' - n + 1 must be positive");
  return {y_hat, posterior.psi / df, df};
}

TRecResult trec(const Hierarchy& h, const Eigen::VectorXd& y_hat,
                const IWParams& posterior) {
  h.validate();
  check_forecast(h, y_hat);
  posterior.validate();
  if (posterior.dim() != h.size())
    throw_validation("trec: posterior dimension does not match hierarchy");

  const Eigen::Index nb = h.n_bottom();
  const double nu_tilde = posterior.nu - static_cast<double>(nb) + 1.0;
  if (!(nu_tilde > 0.0))
    throw_numerical("trec: reconciled degrees of freedom must be positive");

  const auto blocks = conditioning_blocks(h, y_hat, posterior.psi, "trec");
  const Eigen::MatrixXd psi_b = posterior.psi.bottomRightCorner(nb, nb);
  const Eigen::MatrixXd s = summing_matrix(h);

  const double incoherence_quad = blocks.d.dot(blocks.q_inv_d);
  const double c_factor = (1.0 + incoherence_quad) / nu_tilde;

  TRecResult out;
  out.q = blocks.q;
  out.c_factor = c_factor;
  out.scaled_incoherence = std::sqrt(std::max(0.0, incoherence_quad));

  out.bottom.loc = y_hat.tail(nb) + blocks.gain * blocks.q_inv_d;
  out.bottom.scale =
      c_factor * symmetrize(psi_b - blocks.gain *
                                        blocks.q_llt.solve(blocks.gain.transpose()));
  out.bottom.df = nu_tilde;

  out.full.loc = s * out.bottom.loc;
  out.full.scale = s * out.bottom.scale * s.transpose();
  out.full.df = nu_tilde;
  return out;
}

MinimalTRec trec_minimal_oracle(const Eigen::Vector3d& y_hat,
                                const Eigen::Matrix3d& psi_prime,
                                double nu_prime) {
  const double u_hat = y_hat(0);
  const double b1_hat = y_hat(1);
  const double b2_hat = y_hat(2);
  const double psi_u = psi_prime(0, 0);
  const double psi_u1 = psi_prime(0, 1);
  const double psi_u2 = psi_prime(0, 2);
  const double psi_1 = psi_prime(1, 1);
  const double psi_12 = psi_prime(1, 2);
  const double psi_2 = psi_prime(2, 2);

  const double g1 = (psi_1 + psi_12) - psi_u1;
  const double g2 = (psi_2 + psi_12) - psi_u2;
  const double gu = psi_u - psi_u1 - psi_u2;
  const double q = g1 + g2 + gu;
  if (!(q > 0.0)) throw_numerical("trec_minimal_oracle: Q must be positive");

  MinimalTRec out;
  out.q = q;
  out.nu_tilde = nu_prime - 1.0;
  const double incoherence = b1_hat + b2_hat - u_hat;
  out.c_factor = (1.0 + incoherence * incoherence / q) / out.nu_tilde;

  out.b_tilde(0) = (1.0 - g1 / q) * b1_hat + (g1 / q) * (u_hat - b2_hat);
  out.b_tilde(1) = (1.0 - g2 / q) * b2_hat + (g2 / q) * (u_hat - b1_hat);
  out.u_tilde = (1.0 - gu / q) * u_hat + (gu / q) * (b1_hat + b2_hat);

  out.sigma_b(0, 0) = out.c_factor * (psi_1 - g1 * g1 / q);
  out.sigma_b(1, 1) = out.c_factor * (psi_2 - g2 * g2 / q);
  out.sigma_b(0, 1) = out.c_factor * (psi_12 - g1 * g2 / q);
  out.sigma_b(1, 0) = out.sigma_b(0, 1);
  out.sigma_u = std::sqrt(out.c_factor * (psi_u - gu * gu / q));
  return out;
}

Method parse_method(const std::string& name) {
  if (name == "base") return Method::base;
  if (name == "mint") return Method::mint;
  if (name == "trec") return Method::trec;
  if (name == "trec-diag") return Method::trec_diag;
  if (name == "trec-map") return Method::trec_map;
  if (name == "trec-min-nu0") return Method::trec_min_nu0;
  throw_validation("unknown reconciliation method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::base: return "base";
    case Method::mint: return "mint";
    case Method::trec: return "trec";
    case Method::trec_diag: return "trec-diag";
    case Method::trec_map: return "trec-map";
    case Method::trec_min_nu0: return "trec-min-nu0";
  }
  return "unknown";
}

VariantResult reconcile_variant(Method method, const Hierarchy& h,
                                const Eigen::VectorXd& y_hat,
                                const ResidualMatrix& residuals,
                                const ResidualMatrix& prior_residuals,
                                const ReconcileOptions& options) {
  VariantResult out;
  out.method = method;

  ShrinkageOptions shrink;
  shrink.lambda_override = options.lambda_override;
  shrink.center = options.center_residuals;
  shrink.labels = h.labels();

  if (method == Method::base || method == Method::mint) {
    const auto estimate = shrinkage_covariance(residuals, shrink);
    out.diagnostics.lambda = estimate.lambda;
    if (method == Method::base) {
      out.full = MultivariateGaussian{y_hat, estimate.w_hat};
      return out;
    }
    out.mint_result = mint(h, y_hat, estimate.w_hat);
    out.full = out.mint_result->full;
    return out;
  }

  // Prior mean from the baseline residuals, optionally restricted to its
  // diagonal.
  const auto prior_estimate = shrinkage_covariance(prior_residuals, shrink);
  Eigen::MatrixXd psi_mean = prior_estimate.w_hat;
  if (method == Method::trec_diag || options.prior_diag)
    psi_mean = Eigen::MatrixXd(psi_mean.diagonal().asDiagonal());
  out.diagnostics.lambda = prior_estimate.lambda;

  const double n = static_cast<double>(h.size());
  PriorSpec prior;
  prior.psi_mean = psi_mean;
  if (method == Method::trec_min_nu0) {
    prior.nu0 = n + 2.0;
    out.diagnostics.nu0_hit_lower = true;
  } else if (options.nu0_override) {
    prior.nu0 = *options.nu0_override;
    if (prior.nu0 < n + 2.0 || prior.nu0 > 5.0 * n)
      throw_validation("nu0 override must lie in [n+2, 5n]");
  } else {
    const auto fit = optimize_nu0(psi_mean, residuals);
    prior.nu0 = fit.nu0;
    out.diagnostics.nu0_hit_lower = fit.hit_lower;
    out.diagnostics.nu0_hit_upper = fit.hit_upper;
  }
  out.diagnostics.nu0 = prior.nu0;

  const IWParams posterior = iw_posterior(prior.to_iw(), residuals);
  out.diagnostics.nu_prime = posterior.nu;

  if (method == Method::trec_map) {
    out.full = gaussian_conditioning(h, y_hat, iw_map(posterior));
    return out;
  }

  out.t_result = trec(h, y_hat, posterior);
  out.full = out.t_result->full;
  out.diagnostics.c_factor = out.t_result->c_factor;
  out.diagnostics.scaled_incoherence = out.t_result->scaled_incoherence;
  return out;
}

}  // namespace htsrec
