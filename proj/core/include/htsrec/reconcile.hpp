#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "htsrec/covariance.hpp"
#include "htsrec/distributions.hpp"
#include "htsrec/hierarchy.hpp"

namespace htsrec {

/// Gaussian minimum-trace reconciliation: projects the base forecast onto the
/// coherent subspace with weights W^{-1}.
struct MinTResult {
  MultivariateGaussian full;   // N(S P y_hat, S (S^T W^{-1} S)^{-1} S^T)
  Eigen::MatrixXd projection;  // P, n_b x n
};

MinTResult mint(const Hierarchy& h, const Eigen::VectorXd& y_hat,
                const Eigen::MatrixXd& w);

/// Conditions N(y_hat, W) on zero constraint violation; coincides with MinT.
MultivariateGaussian gaussian_conditioning(const Hierarchy& h,
                                           const Eigen::VectorXd& y_hat,
                                           const Eigen::MatrixXd& w);

/// Posterior predictive of the base forecast errors marginalized over the
/// Inverse-Wishart posterior: mt(y_hat, psi' / (nu' - n + 1), nu' - n + 1).
MultivariateT incoherent_predictive(const IWParams& posterior,
                                    const Eigen::VectorXd& y_hat);

/// Reconciled multivariate-t distribution obtained by conditioning the
/// incoherent predictive on the hierarchy constraints.
struct TRecResult {
  MultivariateT bottom;  // mt(b_tilde, sigma_b, nu_tilde)
  MultivariateT full;    // mt(S b_tilde, S sigma_b S^T, nu_tilde)
  double c_factor = 0.0;
  Eigen::MatrixXd q;  // n_u x n_u constraint-violation scale, from psi' blocks
  double scaled_incoherence = 0.0;  // sqrt(d^T Q^{-1} d), d = A b_hat - u_hat
};

TRecResult trec(const Hierarchy& h, const Eigen::VectorXd& y_hat,
                const IWParams& posterior);

/// Scalar closed forms of the reconciled t-distribution on the minimal
/// hierarchy (one upper, two bottom). Kept deliberately independent of
/// trec's block-matrix path; used as its oracle.
struct MinimalTRec {
  Eigen::Vector2d b_tilde;
  double u_tilde = 0.0;
  Eigen::Matrix2d sigma_b;
  double sigma_u = 0.0;  // scale (not variance) of the upper marginal
  double nu_tilde = 0.0;
  double c_factor = 0.0;
  double q = 0.0;
};

MinimalTRec trec_minimal_oracle(const Eigen::Vector3d& y_hat,
                                const Eigen::Matrix3d& psi_prime,
                                double nu_prime);

enum class Method { base, mint, trec, trec_diag, trec_map, trec_min_nu0 };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct ReconcileOptions {
  int season_length = 4;
  std::optional<double> nu0_override;
  std::optional<double> lambda_override;
  bool prior_diag = false;  // zero off-diagonal entries of the prior mean
  bool center_residuals = false;
};

struct ReconcileDiagnostics {
  double lambda = 0.0;         // shrinkage intensity of W-hat / prior mean
  double nu0 = 0.0;            // 0 for pure-Gaussian methods
  double nu_prime = 0.0;
  double c_factor = 0.0;
  double scaled_incoherence = 0.0;
  bool nu0_hit_lower = false;
  bool nu0_hit_upper = false;
};

struct VariantResult {
  Method method = Method::mint;
  ForecastDistribution full;
  std::optional<TRecResult> t_result;
  std::optional<MinTResult> mint_result;
  ReconcileDiagnostics diagnostics;
};

/// Runs one reconciliation method end to end from base forecasts and
/// residuals. `residuals` feed the covariance estimate / posterior;
/// `prior_residuals` (typically baseline-method residuals) set the prior
/// mean for the t-based methods.
VariantResult reconcile_variant(Method method, const Hierarchy& h,
                                const Eigen::VectorXd& y_hat,
                                const ResidualMatrix& residuals,
                                const ResidualMatrix& prior_residuals,
                                const ReconcileOptions& options = {});

}  // namespace htsrec
