#include "htsrec/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "htsrec/errors.hpp"
#include "htsrec/io.hpp"
#include "htsrec/prior.hpp"
#include "htsrec/rng.hpp"

namespace htsrec {

std::vector<RollingOriginPlan::Origin> RollingOriginPlan::origins() const {
  if (train_length < 1) throw_validation("plan: train length must be positive");
  if (origin_count < 1) throw_validation("plan: origin count must be positive");
  if (step < 1) throw_validation("plan: step must be positive");
  // Test points are the last origin_count indices spaced `step` apart,
  // ending at the final observation.
  const int last_test = total_length - 1;
  const int first_test = last_test - (origin_count - 1) * step;
  if (first_test - train_length < 0)
    throw_validation("plan: " + std::to_string(origin_count) + " origins of train length " +
                     std::to_string(train_length) + " (step " + std::to_string(step) +
                     ") do not fit in " + std::to_string(total_length) + " observations");
  std::vector<Origin> out;
  for (int k = 0; k < origin_count; ++k) {
    Origin o;
    o.test_point = first_test + k * step;
    o.window_end = o.test_point;
    o.window_begin = o.test_point - train_length;
    out.push_back(o);
  }
  return out;
}

namespace {

struct SmoothingParams {
  double alpha = 0.3;
  double beta = 0.0;
  double gamma = 0.0;
  double damping = 1.0;
};

// One exponential-smoothing pass in innovation form (level, damped trend,
// and optionally additive seasonal states seeded from `profile`), started
// from the given initial level and trend. The recursion runs from
// first_scored on; residuals are forecast minus actual. Returns the one-step
// forecast for the point after the window.
double smoothing_pass(const Eigen::VectorXd& y, int m,
                      const Eigen::VectorXd* profile, const SmoothingParams& p,
                      double level0, double trend0, Eigen::Index first_scored,
                      double* sse, Eigen::VectorXd* residuals) {
  const Eigen::Index length = y.size();
  double level = level0;
  double trend = trend0;
  Eigen::VectorXd seasonal =
      profile ? *profile : Eigen::VectorXd::Zero(std::max(m, 1));
  if (sse) *sse = 0.0;
  for (Eigen::Index t = first_scored; t < length; ++t) {
    const double season = profile ? seasonal(t % m) : 0.0;
    const double forecast = level + p.damping * trend + season;
    const double error = y(t) - forecast;
    if (sse) *sse += error * error;
    if (residuals) (*residuals)(t - first_scored) = -error;
    level += p.damping * trend + p.alpha * error;
    trend = p.damping * trend + p.alpha * p.beta * error;
    if (profile) seasonal(t % m) += p.gamma * error;
  }
  const double season_next = profile ? seasonal(length % m) : 0.0;
  return level + p.damping * trend + season_next;
}

struct InitialState {
  double level = 0.0;
  double trend = 0.0;
};

// Whole-window OLS line; the seasonal profile is built from the detrended
// seasonal averages, centered to sum to zero.
void ols_line(const Eigen::VectorXd& y, double* intercept, double* slope) {
  const Eigen::Index n = y.size();
  const double t_mean = 0.5 * static_cast<double>(n - 1);
  const double y_mean = y.mean();
  double stt = 0.0, sty = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    stt += (t - t_mean) * (t - t_mean);
    sty += (t - t_mean) * (y(t) - y_mean);
  }
  *slope = stt > 0.0 ? sty / stt : 0.0;
  *intercept = y_mean - *slope * t_mean;
}

Eigen::VectorXd seasonal_profile(const Eigen::VectorXd& y, int m) {
  double intercept, slope;
  ols_line(y, &intercept, &slope);
  Eigen::VectorXd profile = Eigen::VectorXd::Zero(m);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(m);
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    profile(t % m) += y(t) - (intercept + slope * t);
    counts(t % m) += 1;
  }
  for (int i = 0; i < m; ++i)
    if (counts(i) > 0) profile(i) /= counts(i);
  profile.array() -= profile.mean();
  return profile;
}

InitialState ls_start_init(const Eigen::VectorXd& y, bool with_seasonal,
                           double damping) {
  InitialState init;
  if (with_seasonal) {
    double intercept, slope;
    ols_line(y, &intercept, &slope);
    // State sits one step before the first observation.
    init.trend = slope;
    init.level = intercept - damping * slope;
  } else {
    init.level = y(0);
  }
  return init;
}

// Residuals are affine in the initial level and trend, so the in-sample-best
// initial state solves a 2x2 least-squares system built from two unit
// perturbation passes. Mirrors how likelihood-fitted smoothing models
// estimate their starting states.
InitialState least_squares_init(const Eigen::VectorXd& y, int m,
                                const Eigen::VectorXd* profile,
                                const SmoothingParams& p,
                                Eigen::Index first_scored) {
  const InitialState base = ls_start_init(y, profile != nullptr, p.damping);
  const Eigen::Index t_res = y.size() - first_scored;
  Eigen::VectorXd r0(t_res), rl(t_res), rt(t_res);
  smoothing_pass(y, m, profile, p, base.level, base.trend, first_scored,
                 nullptr, &r0);
  smoothing_pass(y, m, profile, p, base.level + 1.0, base.trend, first_scored,
                 nullptr, &rl);
  smoothing_pass(y, m, profile, p, base.level, base.trend + 1.0, first_scored,
                 nullptr, &rt);
  const Eigen::VectorXd dl = rl - r0;  // residual sensitivity to the level
  const Eigen::VectorXd dt = rt - r0;  // and to the trend
  InitialState out = base;
  if (dl.squaredNorm() <= 1e-12 * std::max(1.0, r0.squaredNorm())) {
    if (dt.squaredNorm() > 0.0) out.trend -= dt.dot(r0) / dt.squaredNorm();
    return out;
  }
  Eigen::Matrix2d gram;
  gram << dl.dot(dl), dl.dot(dt), dl.dot(dt), dt.dot(dt);
  Eigen::Vector2d rhs(-dl.dot(r0), -dt.dot(r0));
  const double det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0);
  if (std::abs(det) > 1e-10 * std::max(1.0, gram(0, 0) * gram(1, 1))) {
    const Eigen::Vector2d delta = gram.inverse() * rhs;
    out.level += delta(0);
    out.trend += delta(1);
  }
  return out;
}

}  // namespace

BaseForecastFit fit_base_forecaster(const Eigen::MatrixXd& window,
                                    int season_length) {
  const Eigen::Index length = window.rows();
  const Eigen::Index n = window.cols();
  const int m = season_length;
  if (n < 1) throw_validation("base forecaster: no series");
  if (m < 2) throw_validation("base forecaster: season length must be >= 2");

  // Seasonal state models need two cycles to initialize; shorter windows fall
  // back to level-trend smoothing, mirroring how small-sample model fitting
  // degrades to simpler forms. Estimating the starting states (whole-window
  // seasonal profile, least-squares level and trend, every point scored) is
  // reserved for windows with many cycles, where the extra freedom cannot
  // interpolate the sample.
  const bool with_seasonal = length >= 2 * m + 1;
  const bool estimated_init = !with_seasonal || length >= 8 * m;
  const Eigen::Index first_scored = !with_seasonal ? 1 : (estimated_init ? 0 : m);
  const Eigen::Index t_res = length - first_scored;
  if (t_res < 2)
    throw_insufficient("base forecaster: window of " + std::to_string(length) +
                       " observations leaves fewer than 2 residuals");

  BaseForecastFit fit;
  fit.point.resize(n);
  fit.residuals.values.resize(n, t_res);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd y = window.col(i);
    Eigen::VectorXd profile;
    InitialState cycle_init;
    if (with_seasonal) {
      if (estimated_init) {
        profile = seasonal_profile(y, m);
      } else {
        // First-cycle states: deviations around the cycle mean, trend from
        // the first two cycle means.
        cycle_init.level = y.head(m).mean();
        cycle_init.trend =
            (y.segment(m, m).mean() - cycle_init.level) / static_cast<double>(m);
        profile = y.head(m).array() - cycle_init.level;
      }
    }
    const Eigen::VectorXd* profile_ptr = with_seasonal ? &profile : nullptr;
    double best_sse = std::numeric_limits<double>::infinity();
    SmoothingParams best;

    const auto init_for = [&](const SmoothingParams& p) {
      return estimated_init ? least_squares_init(y, m, profile_ptr, p, first_scored)
                            : cycle_init;
    };
    const auto sse_for = [&](const SmoothingParams& p) {
      const InitialState init = init_for(p);
      double sse;
      smoothing_pass(y, m, profile_ptr, p, init.level, init.trend, first_scored,
                     &sse, nullptr);
      return sse;
    };

    // Golden-section line search over one smoothing weight; continuous optima
    // keep independently fitted series genuinely apart, the way
    // likelihood-fitted smoothing models land on interior values.
    const auto line_search = [&](SmoothingParams p, double SmoothingParams::*axis,
                                 double lo, double hi) {
      const double inv_phi = 0.6180339887498948;
      double a = lo, b = hi;
      double x1 = b - inv_phi * (b - a);
      double x2 = a + inv_phi * (b - a);
      const auto at = [&](double v) {
        p.*axis = v;
        return sse_for(p);
      };
      double f1 = at(x1);
      double f2 = at(x2);
      while (b - a > 1e-3) {
        if (f1 > f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + inv_phi * (b - a);
          f2 = at(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - inv_phi * (b - a);
          f1 = at(x1);
        }
      }
      p.*axis = 0.5 * (a + b);
      return p;
    };

    // Trend structure from a small discrete family; the level and seasonal
    // weights are tuned continuously inside it, so independently fitted
    // series land on genuinely distinct interior optima.
    constexpr double betas[] = {0.0, 0.05, 0.15, 0.35};
    constexpr double dampings[] = {1.0, 0.8};
    for (const double beta : betas) {
      for (const double damping : dampings) {
        if (beta == 0.0 && damping != 1.0) continue;  // no trend to damp
        SmoothingParams p{0.3, beta, 0.3, damping};
        if (with_seasonal) {
          for (int round = 0; round < 2; ++round) {
            p = line_search(p, &SmoothingParams::alpha, 0.02, 0.98);
            p = line_search(p, &SmoothingParams::gamma, 0.02, 0.98);
          }
        } else {
          p.gamma = 0.0;
          p = line_search(p, &SmoothingParams::alpha, 0.02, 0.98);
        }
        const double sse = sse_for(p);
        if (sse < best_sse) {
          best_sse = sse;
          best = p;
        }
      }
    }
    Eigen::VectorXd residuals(t_res);
    const InitialState init = init_for(best);
    fit.point(i) = smoothing_pass(y, m, profile_ptr, best, init.level,
                                  init.trend, first_scored, nullptr, &residuals);
    fit.residuals.values.row(i) = residuals.transpose();
  }
  return fit;
}

namespace {

BaseForecastFit load_external_base(const ExternalBaseForecasts& external,
                                   const Hierarchy& h, int test_point) {
  const std::string stem = external.directory + "/";
  const std::string suffix = std::to_string(test_point) + ".csv";
  BaseForecastFit fit;
  fit.point = read_base_forecast_csv(stem + "mean_" + suffix, h);
  fit.residuals = read_residuals_csv(stem + "residuals_" + suffix, h);
  return fit;
}

struct OriginOutcome {
  bool skipped = false;
  std::string warning;
  OriginRecord record;
};

OriginOutcome evaluate_origin(const Hierarchy& h, const Eigen::MatrixXd& data,
                              const EvaluateConfig& config,
                              const ExternalBaseForecasts* external,
                              const RollingOriginPlan::Origin& origin) {
  OriginOutcome out;
  // Leakage guard: the training window must end strictly before the test point.
  if (origin.window_end > origin.test_point)
    throw_validation("evaluate: training window overlaps its test point");
  const Eigen::MatrixXd window =
      data.middleRows(origin.window_begin, origin.window_end - origin.window_begin);
  try {
    const BaseForecastFit base_fit =
        external ? load_external_base(*external, h, origin.test_point)
                 : fit_base_forecaster(window, config.season_length);

    ShrinkageOptions shrink;
    shrink.center = config.center_residuals;
    shrink.labels = h.labels();
    const auto w_hat = shrinkage_covariance(base_fit.residuals, shrink);

    out.record.base = MultivariateGaussian{base_fit.point, w_hat.w_hat};
    out.record.actual = data.row(origin.test_point).transpose();

    const ResidualMatrix prior_residuals =
        baseline_residuals(window, config.season_length);

    ReconcileOptions options;
    options.season_length = config.season_length;
    options.nu0_override = config.nu0_override;
    options.prior_diag = config.prior_diag;
    options.center_residuals = config.center_residuals;

    for (const Method method : config.methods) {
      const auto result = reconcile_variant(method, h, base_fit.point,
                                            base_fit.residuals, prior_residuals,
                                            options);
      out.record.methods.emplace(method_name(method), result.full);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::insufficient_data) {
      out.skipped = true;
      out.warning = "origin at test point " + std::to_string(origin.test_point) +
                    " skipped: " + e.what();
    } else {
      throw;
    }
  }
  return out;
}

}  // namespace

EvaluationOutcome run_rolling_evaluation(const Hierarchy& h,
                                         const Eigen::MatrixXd& data,
                                         const EvaluateConfig& config,
                                         const ExternalBaseForecasts* external) {
  h.validate();
  if (data.cols() != h.size())
    throw_validation("evaluate: data has " + std::to_string(data.cols()) +
                     " series, hierarchy has " + std::to_string(h.size()));
  if (config.methods.empty()) throw_validation("evaluate: no methods requested");

  RollingOriginPlan plan;
  plan.total_length = static_cast<int>(data.rows());
  plan.train_length = config.train_length;
  plan.origin_count = config.origin_count;
  plan.step = config.step;
  const auto origins = plan.origins();

  std::vector<OriginOutcome> outcomes(origins.size());
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    for (std::size_t k = 0; k < origins.size(); ++k)
      outcomes[k] = evaluate_origin(h, data, config, external, origins[k]);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= origins.size()) return;
        try {
          outcomes[k] = evaluate_origin(h, data, config, external, origins[k]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  EvaluationOutcome outcome;
  outcome.run.series = h.labels();
  outcome.run.es_samples = config.es_samples;
  outcome.run.seed = config.seed;
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (outcomes[k].skipped) {
      warnings.push_back(outcomes[k].warning);
      outcome.skipped_origins.push_back(origins[k].test_point);
    } else {
      outcome.run.origins.push_back(std::move(outcomes[k].record));
    }
  }
  if (outcome.run.origins.empty())
    throw_insufficient("evaluate: every origin was skipped");

  outcome.report = aggregate_report(outcome.run);
  outcome.report.warnings = std::move(warnings);
  return outcome;
}

}  // namespace htsrec
