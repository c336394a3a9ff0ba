#include "htsrec/simulate.hpp"

#include <cmath>
#include <deque>

#include "htsrec/errors.hpp"
#include "htsrec/rng.hpp"

namespace htsrec {

namespace {

Eigen::Vector2d correlated_pair(Rng& rng, const Eigen::Matrix2d& cov) {
  // Closed-form 2x2 Cholesky; a zero matrix yields deterministic zeros.
  const double l11 = std::sqrt(cov(0, 0));
  const double l21 = l11 > 0.0 ? cov(1, 0) / l11 : 0.0;
  const double rest = cov(1, 1) - l21 * l21;
  if (rest < 0.0) throw_numerical("simulate: error covariance is not PSD");
  const double l22 = std::sqrt(rest);
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  return {l11 * z1, l21 * z1 + l22 * z2};
}

Eigen::Vector2d iid_pair(Rng& rng, double variance) {
  const double sd = std::sqrt(variance);
  return {sd * rng.normal(), sd * rng.normal()};
}

}  // namespace

Eigen::MatrixXd simulate_bottom(const SimConfig& config) {
  if (config.length < 1) throw_validation("simulate: length must be positive");
  if (config.seasons < 2) throw_validation("simulate: seasons must be >= 2");
  if (config.trend_level_var < 0.0 || config.trend_slope_var < 0.0 ||
      config.seasonal_var < 0.0)
    throw_validation("simulate: variances must be non-negative");

  Rng master(config.seed);
  Rng level_rng = master.substream(1);
  Rng slope_rng = master.substream(2);
  Rng seasonal_rng = master.substream(3);
  Rng arma_rng = master.substream(4);
  Rng init_rng = master.substream(5);

  // Initial states mu_0, slope_0, and s-1 seasonal lags, each N(0, I_2).
  Eigen::Vector2d level = config.init_scale * Eigen::Vector2d(init_rng.normal(), init_rng.normal());
  Eigen::Vector2d slope = config.init_scale * Eigen::Vector2d(init_rng.normal(), init_rng.normal());
  std::deque<Eigen::Vector2d> seasonal_lags;  // gamma_{t-1}, ..., gamma_{t-(s-1)}
  for (int i = 0; i < config.seasons - 1; ++i)
    seasonal_lags.push_front(config.init_scale *
                             Eigen::Vector2d(init_rng.normal(), init_rng.normal()));

  // ARMA(1,1) errors, burned in toward stationarity before recording.
  Eigen::Vector2d eta = Eigen::Vector2d::Zero();
  Eigen::Vector2d innovation_prev = Eigen::Vector2d::Zero();
  for (int t = 0; t < config.burn_in; ++t) {
    const Eigen::Vector2d innovation = correlated_pair(arma_rng, config.error_cov);
    eta = config.ar * eta + innovation + config.ma * innovation_prev;
    innovation_prev = innovation;
  }

  Eigen::MatrixXd out(config.length, 2);
  for (int t = 0; t < config.length; ++t) {
    slope += iid_pair(slope_rng, config.trend_slope_var);
    level += slope + iid_pair(level_rng, config.trend_level_var);

    Eigen::Vector2d seasonal = iid_pair(seasonal_rng, config.seasonal_var);
    for (const auto& lag : seasonal_lags) seasonal -= lag;
    seasonal_lags.push_front(seasonal);
    seasonal_lags.pop_back();

    const Eigen::Vector2d innovation = correlated_pair(arma_rng, config.error_cov);
    eta = config.ar * eta + innovation + config.ma * innovation_prev;
    innovation_prev = innovation;

    out.row(t) = (level + seasonal + eta).transpose();
  }
  return out;
}

Eigen::MatrixXd simulate_hierarchy(const SimConfig& config) {
  const Eigen::MatrixXd bottom = simulate_bottom(config);
  Eigen::MatrixXd out(bottom.rows(), 3);
  out.col(0) = bottom.col(0) + bottom.col(1);
  out.col(1) = bottom.col(0);
  out.col(2) = bottom.col(1);
  return out;
}

}  // namespace htsrec
