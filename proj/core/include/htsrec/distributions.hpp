#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <variant>

namespace htsrec {

struct MultivariateGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Eigen::Index dim() const { return mean.size(); }
};

struct MultivariateT {
  Eigen::VectorXd loc;
  Eigen::MatrixXd scale;
  double df = 0.0;

  Eigen::Index dim() const { return loc.size(); }

  /// Covariance scale * df / (df - 2); defined only for df > 2.
  Eigen::MatrixXd covariance() const;
};

/// Either joint forecast family, as produced by the reconciliation methods.
using ForecastDistribution = std::variant<MultivariateGaussian, MultivariateT>;

enum class MarginKind { gaussian, student_t };

/// One-dimensional marginal forecast: location-scale Gaussian or Student-t.
struct UnivariateForecast {
  MarginKind kind = MarginKind::gaussian;
  double loc = 0.0;
  double scale = 1.0;
  double df = 0.0;  // student_t only
};

double mvn_logpdf(const MultivariateGaussian& d, const Eigen::VectorXd& x);
double mvt_logpdf(const MultivariateT& d, const Eigen::VectorXd& x);

UnivariateForecast marginal(const MultivariateGaussian& d, Eigen::Index i);
UnivariateForecast marginal(const MultivariateT& d, Eigen::Index i);
UnivariateForecast marginal(const ForecastDistribution& d, Eigen::Index i);

/// Equal-tailed interval loc +/- scale * q at the given coverage level.
std::pair<double, double> prediction_interval(const UnivariateForecast& f,
                                              double level);

double interval_width(const UnivariateForecast& f, double level);

double cdf(const UnivariateForecast& f, double x);

/// Closed-form CRPS for the Gaussian and location-scale Student-t families.
double crps(const UnivariateForecast& f, double y);

/// k x n matrix of draws; deterministic for a fixed seed. Gaussian draws are
/// Cholesky-transformed standard normals; t draws additionally scale each row
/// by sqrt(df / chi2_df).
Eigen::MatrixXd sample(const MultivariateGaussian& d, int k, std::uint64_t seed);
Eigen::MatrixXd sample(const MultivariateT& d, int k, std::uint64_t seed);
Eigen::MatrixXd sample(const ForecastDistribution& d, int k, std::uint64_t seed);

const Eigen::VectorXd& location(const ForecastDistribution& d);
Eigen::Index dimension(const ForecastDistribution& d);

}  // namespace htsrec
