// Command-line front end: reconcile, evaluate, simulate, fit-prior, and
// emit-plotdata subcommands over the core library.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "htsrec/errors.hpp"
#include "htsrec/evaluate.hpp"
#include "htsrec/rng.hpp"
#include "htsrec/io.hpp"
#include "htsrec/prior.hpp"
#include "htsrec/reconcile.hpp"
#include "htsrec/simstudy.hpp"
#include "htsrec/simulate.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace htsrec;

namespace {

void check_prior_shape(const std::string& shape) {
  if (shape != "full" && shape != "diag")
    throw_validation("--prior must be 'full' or 'diag', got '" + shape + "'");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text << std::endl;
  } else {
    write_text_file(out_path, text);
  }
}

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> methods;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    const std::size_t end = csv.find(',', begin);
    const std::string token =
        csv.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
    if (!token.empty()) methods.push_back(parse_method(token));
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  if (methods.empty()) throw_validation("no methods given");
  return methods;
}

ordered_json diagnostics_json(const ReconcileDiagnostics& d, Method method) {
  ordered_json j;
  j["lambda_shrink"] = d.lambda;
  if (method != Method::mint && method != Method::base) {
    j["nu0"] = d.nu0;
    j["nu_prime"] = d.nu_prime;
    j["nu0_hit_lower"] = d.nu0_hit_lower;
    j["nu0_hit_upper"] = d.nu0_hit_upper;
  }
  if (method == Method::trec || method == Method::trec_diag ||
      method == Method::trec_min_nu0) {
    j["c_factor"] = d.c_factor;
    j["scaled_incoherence"] = d.scaled_incoherence;
  }
  return j;
}

struct ReconcileArgs {
  std::string hierarchy_path;
  std::string base_forecast_path;
  std::string residuals_path;
  std::string series_path;
  std::string prior_residuals_path;
  std::string method = "trec";
  std::string prior_shape = "full";
  std::string out;
  int season_length = 12;
  double nu0 = 0.0;
  double lambda = -1.0;
  bool center = false;
};

int run_reconcile(const ReconcileArgs& args) {
  const Hierarchy h = load_hierarchy(args.hierarchy_path);
  const Eigen::VectorXd y_hat = read_base_forecast_csv(args.base_forecast_path, h);
  const ResidualMatrix residuals = read_residuals_csv(args.residuals_path, h);

  ResidualMatrix prior_residuals = residuals;
  if (!args.series_path.empty()) {
    const TimeSeriesData data = read_series_csv(args.series_path, h);
    prior_residuals = baseline_residuals(data.values, args.season_length);
  } else if (!args.prior_residuals_path.empty()) {
    prior_residuals = read_residuals_csv(args.prior_residuals_path, h);
  }

  ReconcileOptions options;
  options.season_length = args.season_length;
  if (args.nu0 > 0.0) options.nu0_override = args.nu0;
  if (args.lambda >= 0.0) options.lambda_override = args.lambda;
  check_prior_shape(args.prior_shape);
  options.prior_diag = args.prior_shape == "diag";
  options.center_residuals = args.center;

  const Method method = parse_method(args.method);
  const VariantResult result =
      reconcile_variant(method, h, y_hat, residuals, prior_residuals, options);

  ordered_json j;
  j["method"] = method_name(method);
  j["series"] = h.labels();
  j["distribution"] = ordered_json::parse(distribution_to_json(result.full));
  j["diagnostics"] = diagnostics_json(result.diagnostics, method);
  emit(j.dump(2), args.out);
  return 0;
}

struct EvaluateArgs {
  std::string hierarchy_path;
  std::string series_path;
  std::string config_path;
  std::string base_forecast_dir;
  std::string methods = "mint,trec";
  std::string prior_shape = "full";
  std::string format = "json";
  std::string out;
  int train_length = 0;
  int origins = 0;
  int step = 1;
  int season_length = 12;
  int es_samples = 2000;
  int threads = 1;
  std::uint64_t seed = 0;
  double nu0 = 0.0;
  bool center = false;
};

int run_evaluate(EvaluateArgs args, const CLI::App* cmd) {
  // Config file values fill in everything the command line left untouched.
  if (!args.config_path.empty()) {
    const ordered_json config = ordered_json::parse(read_text_file(args.config_path));
    const auto fill = [&](const char* flag, const char* key, auto& slot) {
      if (cmd->count(flag) == 0 && config.contains(key))
        slot = config[key].get<std::decay_t<decltype(slot)>>();
    };
    fill("--hierarchy", "hierarchy", args.hierarchy_path);
    fill("--series", "series", args.series_path);
    fill("--methods", "methods", args.methods);
    fill("--train-length", "train_length", args.train_length);
    fill("--origins", "origins", args.origins);
    fill("--step", "step", args.step);
    fill("--season-length", "season_length", args.season_length);
    fill("--es-samples", "es_samples", args.es_samples);
    fill("--threads", "threads", args.threads);
    fill("--seed", "seed", args.seed);
    fill("--nu0", "nu0", args.nu0);
    fill("--prior", "prior", args.prior_shape);
    fill("--format", "format", args.format);
    fill("--base-forecasts", "base_forecasts", args.base_forecast_dir);
    fill("--center-residuals", "center_residuals", args.center);
  }
  if (args.hierarchy_path.empty() || args.series_path.empty())
    throw_validation("evaluate: --hierarchy and --series are required");
  if (args.train_length <= 0 || args.origins <= 0)
    throw_validation("evaluate: --train-length and --origins are required");

  const Dataset dataset = ingest_dataset(args.hierarchy_path, args.series_path);

  EvaluateConfig config;
  config.methods = parse_methods(args.methods);
  config.train_length = args.train_length;
  config.origin_count = args.origins;
  config.step = args.step;
  config.season_length = args.season_length;
  config.es_samples = args.es_samples;
  config.seed = args.seed;
  config.threads = args.threads;
  if (args.nu0 > 0.0) config.nu0_override = args.nu0;
  check_prior_shape(args.prior_shape);
  config.prior_diag = args.prior_shape == "diag";
  config.center_residuals = args.center;

  std::optional<ExternalBaseForecasts> external;
  if (!args.base_forecast_dir.empty())
    external = ExternalBaseForecasts{args.base_forecast_dir};

  const EvaluationOutcome outcome = run_rolling_evaluation(
      dataset.hierarchy, dataset.values, config, external ? &*external : nullptr);

  ordered_json effective;
  effective["hierarchy"] = args.hierarchy_path;
  effective["series"] = args.series_path;
  effective["methods"] = args.methods;
  effective["train_length"] = args.train_length;
  effective["origins"] = args.origins;
  effective["step"] = args.step;
  effective["season_length"] = args.season_length;
  effective["es_samples"] = args.es_samples;
  effective["threads"] = args.threads;
  effective["seed"] = args.seed;
  effective["nu0"] = args.nu0;
  effective["prior"] = args.prior_shape;
  effective["format"] = args.format;
  effective["base_forecasts"] = args.base_forecast_dir;
  effective["center_residuals"] = args.center;

  if (args.format == "csv") {
    emit(report_to_csv(outcome.report, args.train_length), args.out);
  } else {
    emit(report_to_json(outcome.report, effective.dump()), args.out);
  }
  return 0;
}

struct SimulateArgs {
  std::string out = "simulation";
  std::string methods = "mint,trec,trec-map";
  int replications = 100;
  int train_length = 12;
  int es_samples = 2000;
  int threads = 1;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& args) {
  SimStudyConfig config;
  config.replications = args.replications;
  config.train_length = args.train_length;
  config.methods = parse_methods(args.methods);
  config.seed = args.seed;
  config.es_samples = args.es_samples;
  config.threads = args.threads;

  fs::create_directories(args.out);
  const Hierarchy h = Hierarchy::minimal();
  write_text_file((fs::path(args.out) / "hierarchy.json").string(),
                  hierarchy_to_json(h));

  // Per-replication series files replay the exact data the study used.
  for (int k = 0; k < args.replications; ++k) {
    SimConfig generator = config.generator;
    generator.length = args.train_length + 1;
    generator.seed = Rng(args.seed).substream(static_cast<std::uint64_t>(k)).seed();
    const Eigen::MatrixXd data = simulate_hierarchy(generator);
    write_series_csv(
        (fs::path(args.out) / ("replication_" + std::to_string(k) + ".csv")).string(),
        h.labels(), data);
  }

  const SimStudyResult result = run_simulation_study(config);

  ordered_json aggregate;
  aggregate["replications"] = args.replications;
  aggregate["train_length"] = args.train_length;
  aggregate["seed"] = args.seed;
  ordered_json widths;
  for (const auto& [name, matrix] : result.rel_width95) {
    ordered_json per_method;
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      per_method[result.series[j]] = {
          {"rel_width80_geomean",
           std::exp(result.rel_width80.at(name).col(j).array().log().mean())},
          {"rel_width95_geomean", std::exp(matrix.col(j).array().log().mean())},
      };
    }
    widths[name] = per_method;
  }
  aggregate["relative_widths"] = widths;
  aggregate["scores"] =
      ordered_json::parse(report_to_json(result.report))["methods"];
  write_text_file((fs::path(args.out) / "aggregate.json").string(),
                  aggregate.dump(2));
  write_text_file((fs::path(args.out) / "aggregate.csv").string(),
                  report_to_csv(result.report, args.train_length));
  std::cout << "wrote " << args.replications << " replications and aggregate tables to "
            << args.out << std::endl;
  return 0;
}

struct FitPriorArgs {
  std::string hierarchy_path;
  std::string series_path;
  std::string residuals_path;
  std::string prior_shape = "full";
  std::string out;
  int season_length = 12;
  double nu0 = 0.0;
  bool center = false;
};

int run_fit_prior(const FitPriorArgs& args) {
  const Hierarchy h = load_hierarchy(args.hierarchy_path);
  const TimeSeriesData data = read_series_csv(args.series_path, h);
  const ResidualMatrix base_residuals =
      baseline_residuals(data.values, args.season_length);

  ShrinkageOptions shrink;
  shrink.center = args.center;
  shrink.labels = h.labels();
  const auto estimate = shrinkage_covariance(base_residuals, shrink);
  check_prior_shape(args.prior_shape);
  Eigen::MatrixXd psi_mean = estimate.w_hat;
  if (args.prior_shape == "diag")
    psi_mean = Eigen::MatrixXd(psi_mean.diagonal().asDiagonal());

  const ResidualMatrix loo_residuals =
      args.residuals_path.empty() ? base_residuals
                                  : read_residuals_csv(args.residuals_path, h);

  PriorSpec prior;
  prior.psi_mean = psi_mean;
  Nu0Result fit;
  if (args.nu0 > 0.0) {
    const double n = static_cast<double>(h.size());
    if (args.nu0 < n + 2.0 || args.nu0 > 5.0 * n)
      throw_validation("fit-prior: --nu0 must lie in [n+2, 5n]");
    prior.nu0 = args.nu0;
    fit.nu0 = args.nu0;
    fit.loo_score = loo_log_score(psi_mean, loo_residuals, args.nu0);
  } else {
    fit = optimize_nu0(psi_mean, loo_residuals);
    prior.nu0 = fit.nu0;
  }

  ordered_json j;
  j["series"] = h.labels();
  j["nu0"] = fit.nu0;
  j["loo_score"] = fit.loo_score;
  j["nu0_hit_lower"] = fit.hit_lower;
  j["nu0_hit_upper"] = fit.hit_upper;
  j["lambda_shrink"] = estimate.lambda;
  ordered_json psi_rows = ordered_json::array();
  ordered_json psi0_rows = ordered_json::array();
  const Eigen::MatrixXd psi0 = prior.psi0();
  for (Eigen::Index i = 0; i < psi_mean.rows(); ++i) {
    ordered_json row = ordered_json::array();
    ordered_json row0 = ordered_json::array();
    for (Eigen::Index k = 0; k < psi_mean.cols(); ++k) {
      row.push_back(psi_mean(i, k));
      row0.push_back(psi0(i, k));
    }
    psi_rows.push_back(row);
    psi0_rows.push_back(row0);
  }
  j["psi_mean"] = psi_rows;
  j["psi0"] = psi0_rows;
  emit(j.dump(2), args.out);
  return 0;
}

struct PlotDataArgs {
  std::string report_path;
  std::string out;
};

int run_emit_plotdata(const PlotDataArgs& args) {
  const ordered_json report = ordered_json::parse(read_text_file(args.report_path));
  std::ostringstream csv;
  csv.precision(17);
  csv << "method,metric,series,train_length,value\n";
  const int train_length =
      report.contains("config") && report["config"].contains("train_length")
          ? report["config"]["train_length"].get<int>()
          : (report.contains("train_length") ? report["train_length"].get<int>() : 0);
  const ordered_json methods =
      report.contains("methods") ? report["methods"]
                                 : report.value("scores", ordered_json::object());
  for (const auto& [method, body] : methods.items()) {
    for (const auto& [key, value] : body.items()) {
      if (value.is_number()) {
        csv << method << ',' << key << ",all," << train_length << ','
            << value.get<double>() << '\n';
      } else if (key == "series" && value.is_object()) {
        for (const auto& [series, metrics] : value.items()) {
          for (const auto& [metric, metric_value] : metrics.items()) {
            if (metric_value.is_number())
              csv << method << ',' << metric << ',' << series << ','
                  << train_length << ',' << metric_value.get<double>() << '\n';
          }
        }
      }
    }
  }
  emit(csv.str(), args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic forecast reconciliation for hierarchical time series"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors,
               "print failures as machine-readable JSON on stderr");

  ReconcileArgs rec;
  auto* rec_cmd = app.add_subcommand(
      "reconcile", "Reconcile one vector of base forecasts");
  rec_cmd->add_option("--hierarchy", rec.hierarchy_path, "hierarchy JSON")->required();
  rec_cmd->add_option("--base-forecast", rec.base_forecast_path,
                      "CSV with columns series,mean")->required();
  rec_cmd->add_option("--residuals", rec.residuals_path,
                      "in-sample residual CSV")->required();
  rec_cmd->add_option("--series", rec.series_path,
                      "series CSV for eliciting the prior from baseline residuals");
  rec_cmd->add_option("--prior-residuals", rec.prior_residuals_path,
                      "residual CSV used for the prior mean instead of --series");
  rec_cmd->add_option("--method", rec.method,
                      "base|mint|trec|trec-diag|trec-map|trec-min-nu0");
  rec_cmd->add_option("--season-length", rec.season_length, "season length m");
  rec_cmd->add_option("--nu0", rec.nu0, "fix the prior degrees of freedom");
  rec_cmd->add_option("--lambda", rec.lambda, "fix the shrinkage intensity");
  rec_cmd->add_option("--prior", rec.prior_shape, "full|diag prior scale shape");
  rec_cmd->add_flag("--center-residuals", rec.center,
                    "center residuals before covariance estimation (diagnostics)");
  rec_cmd->add_option("--out", rec.out, "output path (default stdout)");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Rolling-origin evaluation");
  ev_cmd->add_option("--hierarchy", ev.hierarchy_path, "hierarchy JSON");
  ev_cmd->add_option("--series", ev.series_path, "series CSV");
  ev_cmd->add_option("--config", ev.config_path,
                     "JSON config mirroring the flags (flags win)");
  ev_cmd->add_option("--train-length", ev.train_length, "training window length");
  ev_cmd->add_option("--origins", ev.origins, "number of rolling origins");
  ev_cmd->add_option("--step", ev.step, "origin step size");
  ev_cmd->add_option("--methods", ev.methods, "comma-separated method list");
  ev_cmd->add_option("--season-length", ev.season_length, "season length m");
  ev_cmd->add_option("--es-samples", ev.es_samples, "energy-score sample count");
  ev_cmd->add_option("--seed", ev.seed, "master seed");
  ev_cmd->add_option("--nu0", ev.nu0, "fix the prior degrees of freedom");
  ev_cmd->add_option("--prior", ev.prior_shape, "full|diag prior scale shape");
  ev_cmd->add_option("--threads", ev.threads, "worker threads");
  ev_cmd->add_option("--base-forecasts", ev.base_forecast_dir,
                     "directory of external per-origin base forecasts");
  ev_cmd->add_option("--format", ev.format, "json|csv");
  ev_cmd->add_flag("--center-residuals", ev.center,
                   "center residuals before covariance estimation (diagnostics)");
  ev_cmd->add_option("--out", ev.out, "output path (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Replicated study on the simulated minimal hierarchy");
  sim_cmd->add_option("--replications", sim.replications, "replication count");
  sim_cmd->add_option("--train-length", sim.train_length, "training length");
  sim_cmd->add_option("--methods", sim.methods, "comma-separated method list");
  sim_cmd->add_option("--es-samples", sim.es_samples, "energy-score sample count");
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--threads", sim.threads, "worker threads");
  sim_cmd->add_option("--out", sim.out, "output directory")->required();

  FitPriorArgs fp;
  auto* fp_cmd = app.add_subcommand("fit-prior",
                                    "Elicit the Inverse-Wishart prior");
  fp_cmd->add_option("--hierarchy", fp.hierarchy_path, "hierarchy JSON")->required();
  fp_cmd->add_option("--series", fp.series_path, "series CSV")->required();
  fp_cmd->add_option("--residuals", fp.residuals_path,
                     "model residual CSV for the LOO objective");
  fp_cmd->add_option("--season-length", fp.season_length, "season length m");
  fp_cmd->add_option("--nu0", fp.nu0, "skip optimization and fix nu0");
  fp_cmd->add_option("--prior", fp.prior_shape, "full|diag prior scale shape");
  fp_cmd->add_flag("--center-residuals", fp.center,
                   "center residuals before covariance estimation (diagnostics)");
  fp_cmd->add_option("--out", fp.out, "output path (default stdout)");

  PlotDataArgs pd;
  auto* pd_cmd = app.add_subcommand("emit-plotdata",
                                    "Flatten a report JSON into tidy CSV");
  pd_cmd->add_option("--report", pd.report_path, "report JSON path")->required();
  pd_cmd->add_option("--out", pd.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (rec_cmd->parsed()) return run_reconcile(rec);
    if (ev_cmd->parsed()) return run_evaluate(ev, ev_cmd);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (fp_cmd->parsed()) return run_fit_prior(fp);
    if (pd_cmd->parsed()) return run_emit_plotdata(pd);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    if (json_errors) {
      ordered_json j;
      j["error"] = e.kind_name();
      j["message"] = e.what();
      j["exit_code"] = e.exit_code();
      std::cerr << j.dump() << std::endl;
    } else {
      std::cerr << "error (" << e.kind_name() << "): " << e.what() << std::endl;
    }
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 0;
}
