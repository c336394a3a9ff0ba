#include "htsrec/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htsrec/errors.hpp"

namespace htsrec {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kKpssCritical5 = 0.463;
constexpr double kSeasonalAcfGate = 0.3;
}  // namespace

double autocorrelation(const Eigen::VectorXd& x, int lag) {
  const Eigen::Index n = x.size();
  if (lag < 0 || lag >= n) throw_validation("autocorrelation: bad lag");
  const Eigen::VectorXd centered = x.array() - x.mean();
  const double denom = centered.squaredNorm();
  if (denom <= 0.0) return 0.0;
  double num = 0.0;
  for (Eigen::Index t = lag; t < n; ++t) num += centered(t) * centered(t - lag);
  return num / denom;
}

double kpss_level_statistic(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw_validation("kpss: need at least 2 observations");
  const Eigen::VectorXd e = x.array() - x.mean();
  const double gamma0 = e.squaredNorm() / static_cast<double>(n);
  if (gamma0 <= 0.0) return 0.0;

  const int bandwidth =
      static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 0.25)));
  double lrv = gamma0;
  for (int l = 1; l <= bandwidth; ++l) {
    if (l >= n) break;
    double gamma_l = 0.0;
    for (Eigen::Index t = l; t < n; ++t) gamma_l += e(t) * e(t - l);
    gamma_l /= static_cast<double>(n);
    lrv += 2.0 * (1.0 - static_cast<double>(l) / (bandwidth + 1.0)) * gamma_l;
  }
  if (lrv <= 0.0) return 0.0;

  double cumulative = 0.0;
  double stat = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    cumulative += e(t);
    stat += cumulative * cumulative;
  }
  return stat / (static_cast<double>(n) * static_cast<double>(n) * lrv);
}

BaselineSelection select_baseline(const Eigen::VectorXd& series, int m) {
  if (m < 2) throw_validation("select_baseline: season length must be >= 2");
  BaselineSelection sel;
  sel.forecaster = {BaselineForecaster::Kind::naive, m};
  if (series.size() < 3 * static_cast<Eigen::Index>(m)) {
    sel.short_history = true;
    return sel;
  }

  // First-difference before gauging seasonal autocorrelation, so trends
  // (deterministic or stochastic) do not masquerade as seasonality.
  const Eigen::Index n = series.size();
  Eigen::VectorXd differenced(n - 1);
  for (Eigen::Index t = 1; t < n; ++t) differenced(t - 1) = series(t) - series(t - 1);

  sel.seasonal_acf = autocorrelation(differenced, m);
  if (sel.seasonal_acf < kSeasonalAcfGate) return sel;

  // Seasonal difference of the already first-differenced series: stationary
  // when one seasonal difference captures the periodic structure, regardless
  // of any stochastic trend.
  Eigen::VectorXd seasonal_diff(n - 1 - m);
  for (Eigen::Index t = m; t < n - 1; ++t)
    seasonal_diff(t - m) = differenced(t) - differenced(t - m);
  sel.kpss_stat = kpss_level_statistic(seasonal_diff);
  if (sel.kpss_stat <= kKpssCritical5)
    sel.forecaster.kind = BaselineForecaster::Kind::seasonal_naive;
  return sel;
}

Eigen::VectorXd baseline_residual_series(const Eigen::VectorXd& series,
                                         const BaselineForecaster& f) {
  const Eigen::Index n = series.size();
  const Eigen::Index lag =
      f.kind == BaselineForecaster::Kind::naive ? 1 : f.season_length;
  if (f.kind == BaselineForecaster::Kind::seasonal_naive && f.season_length < 2)
    throw_validation("baseline: seasonal naive needs season length >= 2");
  if (n < lag + 1)
    throw_insufficient("baseline: history of length " + std::to_string(n) +
                       " too short for lag " + std::to_string(lag));
  Eigen::VectorXd res(n - lag);
  for (Eigen::Index t = lag; t < n; ++t) res(t - lag) = series(t - lag) - series(t);
  return res;
}

ResidualMatrix baseline_residuals(const Eigen::MatrixXd& series,
                                  const std::vector<BaselineForecaster>& choices) {
  const Eigen::Index n = series.cols();
  const Eigen::Index t_obs = series.rows();
  if (static_cast<Eigen::Index>(choices.size()) != n)
    throw_validation("baseline_residuals: one forecaster per series required");

  Eigen::Index max_lag = 1;
  for (const auto& f : choices) {
    const Eigen::Index lag =
        f.kind == BaselineForecaster::Kind::naive ? 1 : f.season_length;
    max_lag = std::max(max_lag, lag);
  }
  if (t_obs < max_lag + 1)
    throw_insufficient("baseline_residuals: " + std::to_string(t_obs) +
                       " observations cannot cover warm-up " +
                       std::to_string(max_lag));

  const Eigen::Index t_res = t_obs - max_lag;
  ResidualMatrix out;
  out.values.resize(n, t_res);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd all = baseline_residual_series(series.col(i), choices[i]);
    out.values.row(i) = all.tail(t_res).transpose();
  }
  return out;
}

ResidualMatrix baseline_residuals(const Eigen::MatrixXd& series, int m) {
  std::vector<BaselineForecaster> choices;
  choices.reserve(series.cols());
  for (Eigen::Index i = 0; i < series.cols(); ++i)
    choices.push_back(select_baseline(series.col(i), m).forecaster);
  return baseline_residuals(series, choices);
}

Eigen::MatrixXd build_psi_mean(const ResidualMatrix& baseline_residuals,
                               const ShrinkageOptions& options) {
  return shrinkage_covariance(baseline_residuals, options).w_hat;
}

Eigen::MatrixXd PriorSpec::psi0() const {
  const double n = static_cast<double>(psi_mean.rows());
  return (nu0 - n - 1.0) * psi_mean;
}

double loo_log_score(const Eigen::MatrixXd& psi_mean, const ResidualMatrix& r,
                     double nu) {
  const Eigen::Index n = psi_mean.rows();
  const Eigen::Index t = r.count();
  if (t < 1) throw_insufficient("loo_log_score: no residual columns");
  if (r.series_count() != n)
    throw_validation("loo_log_score: residual dimension mismatch");

  const double n_d = static_cast<double>(n);
  const double df = nu + static_cast<double>(t) - n_d;
  if (!(df > 0.0)) return -std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd psi0 = (nu - n_d - 1.0) * psi_mean;
  const Eigen::MatrixXd m =
      symmetrize(psi0 + r.values * r.values.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  const double log_det_m = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  // Constant part of the multivariate-t log density at scale M_i / df.
  const double constant = std::lgamma(0.5 * (df + n_d)) - std::lgamma(0.5 * df) -
                          0.5 * n_d * std::log(df * kPi) + 0.5 * n_d * std::log(df);

  double total = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) {
    const Eigen::VectorXd col = r.values.col(i);
    const Eigen::VectorXd z = llt.matrixL().solve(col);
    const double quad = z.squaredNorm();  // r^T M^{-1} r
    const double beta = 1.0 - quad;
    double term;
    if (beta > 1e-12) {
      // Downdated log-det and quadratic form in closed form: the density
      // argument collapses to -log(beta).
      term = constant - 0.5 * (log_det_m + std::log(beta)) +
             0.5 * (df + n_d) * std::log(beta);
    } else {
      // Dominant column: fall back to factorizing M - r r^T directly.
      Eigen::LLT<Eigen::MatrixXd> llt_i(
          symmetrize(m - col * col.transpose()));
      if (llt_i.info() != Eigen::Success)
        return -std::numeric_limits<double>::infinity();
      const double log_det_i =
          2.0 * llt_i.matrixLLT().diagonal().array().log().sum();
      const double quad_i = llt_i.matrixL().solve(col).squaredNorm();
      term = constant - 0.5 * log_det_i -
             0.5 * (df + n_d) * std::log1p(quad_i);
    }
    total += term;
  }
  return total;
}

Nu0Result optimize_nu0(const Eigen::MatrixXd& psi_mean, const ResidualMatrix& r) {
  const double n = static_cast<double>(psi_mean.rows());
  const double lo = n + 2.0;
  const double hi = 5.0 * n;
  const auto objective = [&](double nu) { return loo_log_score(psi_mean, r, nu); };

  // Coarse scan guards against flat or mildly multimodal objectives before
  // the golden-section refinement.
  constexpr int scan_points = 17;
  double best_nu = lo;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan_points; ++i) {
    const double nu = lo + (hi - lo) * i / (scan_points - 1.0);
    const double val = objective(nu);
    if (val > best_val) {
      best_val = val;
      best_nu = nu;
    }
  }
  if (!std::isfinite(best_val))
    throw_numerical("optimize_nu0: LOO objective is non-finite over [n+2, 5n] "
                    "(prior misfit)");

  const double span = (hi - lo) / (scan_points - 1.0);
  double a = std::max(lo, best_nu - span);
  double b = std::min(hi, best_nu + span);

  constexpr double inv_phi = 0.6180339887498948482;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > 1e-3) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    }
  }

  Nu0Result out;
  out.nu0 = 0.5 * (a + b);
  out.hit_lower = out.nu0 - lo < 5e-3;
  out.hit_upper = hi - out.nu0 < 5e-3;
  if (out.hit_lower) out.nu0 = lo;
  if (out.hit_upper) out.nu0 = hi;
  out.loo_score = objective(out.nu0);
  return out;
}

}  // namespace htsrec
