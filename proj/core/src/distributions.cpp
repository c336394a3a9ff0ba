#include "htsrec/distributions.hpp"

#include <cmath>

#include "htsrec/covariance.hpp"
#include "htsrec/errors.hpp"
#include "htsrec/rng.hpp"
#include "htsrec/special_math.hpp"

namespace htsrec {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInvSqrtPi = 0.5641895835477562869480794515607725858;
}  // namespace

Eigen::MatrixXd MultivariateT::covariance() const {
  if (!(df > 2.0))
    throw_numerical("mvt: covariance undefined for df <= 2 (df = " +
                    std::to_string(df) + ")");
  return scale * (df / (df - 2.0));
}

double mvn_logpdf(const MultivariateGaussian& d, const Eigen::VectorXd& x) {
  if (x.size() != d.dim()) throw_validation("mvn_logpdf: dimension mismatch");
  const auto llt = cholesky(d.cov, "mvn_logpdf");
  const Eigen::VectorXd z = llt.matrixL().solve(x - d.mean);
  const double log_det =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (d.dim() * std::log(2.0 * kPi) + log_det + z.squaredNorm());
}

double mvt_logpdf(const MultivariateT& d, const Eigen::VectorXd& x) {
  if (x.size() != d.dim()) throw_validation("mvt_logpdf: dimension mismatch");
  if (!(d.df > 0.0)) throw_validation("mvt_logpdf: df must be positive");
  const double n = static_cast<double>(d.dim());
  const auto llt = cholesky(d.scale, "mvt_logpdf");
  const Eigen::VectorXd z = llt.matrixL().solve(x - d.loc);
  const double log_det =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::lgamma(0.5 * (d.df + n)) - std::lgamma(0.5 * d.df) -
         0.5 * n * std::log(d.df * kPi) - 0.5 * log_det -
         0.5 * (d.df + n) * std::log1p(z.squaredNorm() / d.df);
}

UnivariateForecast marginal(const MultivariateGaussian& d, Eigen::Index i) {
  if (i < 0 || i >= d.dim()) throw_validation("marginal: index out of range");
  return {MarginKind::gaussian, d.mean(i), std::sqrt(d.cov(i, i)), 0.0};
}

UnivariateForecast marginal(const MultivariateT& d, Eigen::Index i) {
  if (i < 0 || i >= d.dim()) throw_validation("marginal: index out of range");
  return {MarginKind::student_t, d.loc(i), std::sqrt(d.scale(i, i)), d.df};
}

UnivariateForecast marginal(const ForecastDistribution& d, Eigen::Index i) {
  return std::visit([i](const auto& dist) { return marginal(dist, i); }, d);
}

std::pair<double, double> prediction_interval(const UnivariateForecast& f,
                                              double level) {
  if (!(level > 0.0 && level < 1.0))
    throw_validation("prediction_interval: level must be in (0,1)");
  const double p = 0.5 * (1.0 + level);
  const double q = f.kind == MarginKind::gaussian ? norm_quantile(p)
                                                  : student_t_quantile(p, f.df);
  return {f.loc - f.scale * q, f.loc + f.scale * q};
}

double interval_width(const UnivariateForecast& f, double level) {
  const auto [lo, hi] = prediction_interval(f, level);
  return hi - lo;
}

double cdf(const UnivariateForecast& f, double x) {
  const double z = (x - f.loc) / f.scale;
  return f.kind == MarginKind::gaussian ? norm_cdf(z) : student_t_cdf(z, f.df);
}

namespace {

double crps_standard_normal(double z) {
  return z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) - kInvSqrtPi;
}

// Location-scale Student-t CRPS (Jordan, Krueger & Lerch closed form);
// requires df > 1 for the score to be finite.
double crps_standard_t(double z, double df) {
  if (!(df > 1.0))
    throw_numerical("crps: Student-t CRPS requires df > 1 (df = " +
                    std::to_string(df) + ")");
  const double f_z = student_t_pdf(z, df);
  const double cdf_z = student_t_cdf(z, df);
  const double b_half = std::exp(log_beta(0.5, 0.5 * df));
  const double b_tail = std::exp(log_beta(0.5, df - 0.5));
  return z * (2.0 * cdf_z - 1.0) + 2.0 * f_z * (df + z * z) / (df - 1.0) -
         2.0 * std::sqrt(df) / (df - 1.0) * b_tail / (b_half * b_half);
}

}  // namespace

double crps(const UnivariateForecast& f, double y) {
  const double z = (y - f.loc) / f.scale;
  const double standardized = f.kind == MarginKind::gaussian
                                  ? crps_standard_normal(z)
                                  : crps_standard_t(z, f.df);
  return f.scale * standardized;
}

namespace {

Eigen::MatrixXd standard_normal_matrix(Rng& rng, int k, Eigen::Index n) {
  Eigen::MatrixXd z(k, n);
  for (int row = 0; row < k; ++row)
    for (Eigen::Index col = 0; col < n; ++col) z(row, col) = rng.normal();
  return z;
}

// PSD square root via the eigendecomposition. Reconciled joint matrices are
// rank-deficient (their support is the coherent subspace), so a plain
// Cholesky would reject them.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const std::string& context) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw_numerical(context + ": eigendecomposition failed");
  const double tol = 1e-10 * std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots(i) < -tol)
      throw_numerical(context + ": matrix is not positive semi-definite");
    roots(i) = std::sqrt(std::max(0.0, roots(i)));
  }
  return solver.eigenvectors() * roots.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd sample(const MultivariateGaussian& d, int k, std::uint64_t seed) {
  if (k < 1) throw_validation("sample: k must be >= 1");
  Rng rng(seed);
  const Eigen::MatrixXd root = psd_sqrt(d.cov, "sample(gaussian)");
  Eigen::MatrixXd z = standard_normal_matrix(rng, k, d.dim());
  Eigen::MatrixXd out = z * root.transpose();
  out.rowwise() += d.mean.transpose();
  return out;
}

Eigen::MatrixXd sample(const MultivariateT& d, int k, std::uint64_t seed) {
  if (k < 1) throw_validation("sample: k must be >= 1");
  Rng rng(seed);
  const Eigen::MatrixXd root = psd_sqrt(d.scale, "sample(mvt)");
  Eigen::MatrixXd z = standard_normal_matrix(rng, k, d.dim());
  Eigen::MatrixXd out = z * root.transpose();
  for (int row = 0; row < k; ++row) {
    const double chi2 = rng.chi_squared(d.df);
    out.row(row) *= std::sqrt(d.df / chi2);
  }
  out.rowwise() += d.loc.transpose();
  return out;
}

Eigen::MatrixXd sample(const ForecastDistribution& d, int k, std::uint64_t seed) {
  return std::visit([&](const auto& dist) { return sample(dist, k, seed); }, d);
}

const Eigen::VectorXd& location(const ForecastDistribution& d) {
  if (const auto* g = std::get_if<MultivariateGaussian>(&d)) return g->mean;
  return std::get<MultivariateT>(d).loc;
}

Eigen::Index dimension(const ForecastDistribution& d) {
  return location(d).size();
}

}  // namespace htsrec
