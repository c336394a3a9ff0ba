#include "htsrec/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "htsrec/errors.hpp"
#include "htsrec/rng.hpp"

namespace htsrec {

double mse(const std::vector<Eigen::VectorXd>& forecasts,
           const std::vector<Eigen::VectorXd>& actuals) {
  if (forecasts.empty()) throw_validation("mse: empty input");
  if (forecasts.size() != actuals.size())
    throw_validation("mse: forecast/actual count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    if (forecasts[i].size() != actuals[i].size())
      throw_validation("mse: dimension mismatch at origin " + std::to_string(i));
    total += (forecasts[i] - actuals[i]).squaredNorm();
  }
  return total / static_cast<double>(forecasts.size());
}

double mis(const UnivariateForecast& f, double y, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw_validation("mis: alpha must be in (0,1)");
  const auto [lower, upper] = prediction_interval(f, 1.0 - alpha);
  double score = upper - lower;
  if (y < lower) score += 2.0 / alpha * (lower - y);
  if (y > upper) score += 2.0 / alpha * (y - upper);
  return score;
}

double energy_score(const ForecastDistribution& d, const Eigen::VectorXd& y,
                    int samples, std::uint64_t seed) {
  if (samples < 2 || samples % 2 != 0)
    throw_validation("energy_score: sample count must be even and >= 2");
  const Eigen::MatrixXd draws = sample(d, samples, seed);
  if (draws.cols() != y.size())
    throw_validation("energy_score: dimension mismatch");
  double to_actual = 0.0;
  for (int i = 0; i < samples; ++i)
    to_actual += (draws.row(i).transpose() - y).norm();
  to_actual /= static_cast<double>(samples);
  double between = 0.0;
  for (int i = 0; i + 1 < samples; i += 2)
    between += (draws.row(i) - draws.row(i + 1)).norm();
  between /= static_cast<double>(samples / 2);
  return to_actual - 0.5 * between;
}

namespace {

std::vector<double> ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = 0.5 * (i + j) + 1.0;  // ties share the mean rank
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman_correlation(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw_validation("spearman: need two equally sized samples");
  return pearson(ranks(x), ranks(y));
}

namespace {

struct UnivariateAccumulator {
  double crps_sum = 0.0;
  double mis80_sum = 0.0;
  double mis95_sum = 0.0;
  int covered80 = 0;
  int covered95 = 0;
  double log_width80_sum = 0.0;  // log width-ratio vs base, summed over origins
  double log_width95_sum = 0.0;
};

struct MethodAccumulator {
  std::vector<UnivariateAccumulator> series;
  std::vector<Eigen::VectorXd> points;
  double es_sum = 0.0;
};

void score_origin(const ForecastDistribution& dist, const Eigen::VectorXd& actual,
                  const ForecastDistribution& base, MethodAccumulator& acc) {
  const Eigen::Index n = actual.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    const UnivariateForecast f = marginal(dist, j);
    auto& a = acc.series[j];
    a.crps_sum += crps(f, actual(j));
    a.mis80_sum += mis(f, actual(j), 0.2);
    a.mis95_sum += mis(f, actual(j), 0.05);
    const auto pi80 = prediction_interval(f, 0.80);
    const auto pi95 = prediction_interval(f, 0.95);
    if (actual(j) >= pi80.first && actual(j) <= pi80.second) ++a.covered80;
    if (actual(j) >= pi95.first && actual(j) <= pi95.second) ++a.covered95;
    const UnivariateForecast fb = marginal(base, j);
    a.log_width80_sum += std::log((pi80.second - pi80.first) / interval_width(fb, 0.80));
    a.log_width95_sum += std::log((pi95.second - pi95.first) / interval_width(fb, 0.95));
  }
  acc.points.push_back(location(dist));
}

double geometric_mean_of_ratios(const std::vector<double>& numerator,
                                const std::vector<double>& denominator,
                                const std::vector<std::string>& series,
                                const std::string& what) {
  double log_sum = 0.0;
  for (std::size_t j = 0; j < numerator.size(); ++j) {
    if (!(denominator[j] > 0.0))
      throw_numerical("aggregate_report: base " + what + " is zero for series '" +
                      series[j] + "' (relative score undefined)");
    log_sum += std::log(numerator[j] / denominator[j]);
  }
  return std::exp(log_sum / static_cast<double>(numerator.size()));
}

}  // namespace

ScoreReport aggregate_report(const EvaluationRun& run) {
  const int r = static_cast<int>(run.origins.size());
  if (r == 0) throw_validation("aggregate_report: no origins");
  const Eigen::Index n = run.origins.front().actual.size();
  if (static_cast<Eigen::Index>(run.series.size()) != n)
    throw_validation("aggregate_report: series label count mismatch");

  std::vector<std::string> method_names;
  for (const auto& [name, dist] : run.origins.front().methods)
    method_names.push_back(name);

  MethodAccumulator base_acc;
  base_acc.series.resize(n);
  std::map<std::string, MethodAccumulator> accs;
  for (const auto& name : method_names) accs[name].series.resize(n);

  std::vector<Eigen::VectorXd> actuals;
  for (int i = 0; i < r; ++i) {
    const auto& origin = run.origins[i];
    if (origin.actual.size() != n)
      throw_validation("aggregate_report: actual dimension mismatch at origin " +
                       std::to_string(i));
    actuals.push_back(origin.actual);
    const std::uint64_t es_seed =
        Rng(run.seed).substream(0x45530000ull + static_cast<std::uint64_t>(i)).seed();
    score_origin(origin.base, origin.actual, origin.base, base_acc);
    base_acc.es_sum += energy_score(origin.base, origin.actual, run.es_samples, es_seed);
    for (const auto& name : method_names) {
      const auto it = origin.methods.find(name);
      if (it == origin.methods.end())
        throw_validation("aggregate_report: origin " + std::to_string(i) +
                         " is missing method '" + name + "'");
      score_origin(it->second, origin.actual, origin.base, accs[name]);
      accs[name].es_sum +=
          energy_score(it->second, origin.actual, run.es_samples, es_seed);
    }
  }

  const auto finalize = [&](const MethodAccumulator& acc, const MethodReport* base) {
    MethodReport report;
    report.mse_value = mse(acc.points, actuals);
    report.es_sum = acc.es_sum;
    const double origins = static_cast<double>(r);
    double log_w80 = 0.0, log_w95 = 0.0, cov80 = 0.0, cov95 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& a = acc.series[j];
      report.crps_series.push_back(a.crps_sum / origins);
      report.mis80_series.push_back(a.mis80_sum / origins);
      report.mis95_series.push_back(a.mis95_sum / origins);
      report.coverage80_series.push_back(a.covered80 / origins);
      report.coverage95_series.push_back(a.covered95 / origins);
      report.rel_width80_series.push_back(std::exp(a.log_width80_sum / origins));
      report.rel_width95_series.push_back(std::exp(a.log_width95_sum / origins));
      log_w80 += a.log_width80_sum / origins;
      log_w95 += a.log_width95_sum / origins;
      cov80 += a.covered80 / origins;
      cov95 += a.covered95 / origins;
    }
    report.coverage80 = cov80 / static_cast<double>(n);
    report.coverage95 = cov95 / static_cast<double>(n);
    report.rel_width80 = std::exp(log_w80 / static_cast<double>(n));
    report.rel_width95 = std::exp(log_w95 / static_cast<double>(n));
    if (base != nullptr) {
      if (!(base->mse_value > 0.0))
        throw_numerical("aggregate_report: base MSE is zero (RelMSE undefined)");
      if (!(base->es_sum > 0.0))
        throw_numerical("aggregate_report: base energy score sum is zero");
      report.rel_mse = report.mse_value / base->mse_value;
      report.rel_es = report.es_sum / base->es_sum;
      report.rel_crps = geometric_mean_of_ratios(report.crps_series,
                                                 base->crps_series, run.series,
                                                 "CRPS");
      report.rel_mis80 = geometric_mean_of_ratios(report.mis80_series,
                                                  base->mis80_series, run.series,
                                                  "MIS80");
      report.rel_mis95 = geometric_mean_of_ratios(report.mis95_series,
                                                  base->mis95_series, run.series,
                                                  "MIS95");
    }
    return report;
  };

  ScoreReport out;
  out.series = run.series;
  out.origin_count = r;
  out.base = finalize(base_acc, nullptr);
  for (const auto& name : method_names)
    out.methods[name] = finalize(accs[name], &out.base);
  return out;
}

}  // namespace htsrec
