#include "htsrec/simstudy.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "htsrec/errors.hpp"
#include "htsrec/evaluate.hpp"
#include "htsrec/prior.hpp"
#include "htsrec/rng.hpp"

namespace htsrec {

namespace {

struct ReplicationOutcome {
  OriginRecord record;
  std::map<std::string, Eigen::VectorXd> width80;  // per-series width ratios
  std::map<std::string, Eigen::VectorXd> width95;
  double scaled_incoherence = 0.0;
  double nu0 = 0.0;
};

ReplicationOutcome run_replication(const SimStudyConfig& config,
                                   const Hierarchy& h, std::uint64_t seed) {
  SimConfig generator = config.generator;
  generator.length = config.train_length + 1;
  generator.seasons = config.season_length;
  generator.seed = seed;
  const Eigen::MatrixXd data = simulate_hierarchy(generator);

  const Eigen::MatrixXd window = data.topRows(config.train_length);
  const BaseForecastFit base_fit =
      fit_base_forecaster(window, config.season_length);

  ShrinkageOptions shrink;
  shrink.labels = h.labels();
  const auto w_hat = shrinkage_covariance(base_fit.residuals, shrink);
  const MultivariateGaussian base{base_fit.point, w_hat.w_hat};

  const ResidualMatrix prior_residuals =
      baseline_residuals(window, config.season_length);

  ReconcileOptions options;
  options.season_length = config.season_length;
  options.nu0_override = config.nu0_override;

  ReplicationOutcome out;
  out.record.base = base;
  out.record.actual = data.row(config.train_length).transpose();

  const Eigen::Index n = h.size();
  for (const Method method : config.methods) {
    const auto result = reconcile_variant(method, h, base_fit.point,
                                          base_fit.residuals, prior_residuals,
                                          options);
    const std::string name = method_name(method);
    out.record.methods.emplace(name, result.full);
    Eigen::VectorXd w80(n), w95(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto fm = marginal(result.full, j);
      const auto fb = marginal(out.record.base, j);
      w80(j) = interval_width(fm, 0.80) / interval_width(fb, 0.80);
      w95(j) = interval_width(fm, 0.95) / interval_width(fb, 0.95);
    }
    out.width80.emplace(name, std::move(w80));
    out.width95.emplace(name, std::move(w95));
    if (method == Method::trec) {
      out.scaled_incoherence = result.diagnostics.scaled_incoherence;
      out.nu0 = result.diagnostics.nu0;
    }
  }
  return out;
}

}  // namespace

SimStudyResult run_simulation_study(const SimStudyConfig& config) {
  if (config.replications < 1)
    throw_validation("simulation study: replications must be positive");
  if (config.methods.empty())
    throw_validation("simulation study: no methods requested");

  const Hierarchy h = Hierarchy::minimal();
  Rng master(config.seed);
  std::vector<std::uint64_t> seeds(config.replications);
  for (int k = 0; k < config.replications; ++k)
    seeds[k] = master.substream(static_cast<std::uint64_t>(k)).seed();

  std::vector<ReplicationOutcome> outcomes(config.replications);
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    for (int k = 0; k < config.replications; ++k)
      outcomes[k] = run_replication(config, h, seeds[k]);
  } else {
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= config.replications) return;
        try {
          outcomes[k] = run_replication(config, h, seeds[k]);
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

  SimStudyResult result;
  result.series = h.labels();
  const Eigen::Index n = h.size();
  for (const Method method : config.methods) {
    const std::string name = method_name(method);
    result.rel_width80[name] = Eigen::MatrixXd(config.replications, n);
    result.rel_width95[name] = Eigen::MatrixXd(config.replications, n);
  }
  EvaluationRun run;
  run.series = result.series;
  run.es_samples = config.es_samples;
  run.seed = config.seed;
  for (int k = 0; k < config.replications; ++k) {
    auto& outcome = outcomes[k];
    for (const Method method : config.methods) {
      const std::string name = method_name(method);
      result.rel_width80[name].row(k) = outcome.width80[name].transpose();
      result.rel_width95[name].row(k) = outcome.width95[name].transpose();
    }
    result.scaled_incoherence.push_back(outcome.scaled_incoherence);
    result.nu0.push_back(outcome.nu0);
    if (config.compute_scores) run.origins.push_back(std::move(outcome.record));
  }
  if (config.compute_scores) result.report = aggregate_report(run);
  return result;
}

}  // namespace htsrec
