// CLI for the insertion lab: dataset collection, convergence analysis, model
// training/evaluation, and closed-loop insertion trials, all driven by one
// JSON run-config. Exit codes: 0 success, 1 usage error, 2 runtime error.

#include "cli_main.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pih/csv.hpp"
#include "pih/run_config.hpp"

namespace pih {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_flag;
};

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg = RunConfig::load(args.config_path);
  if (const char* env_seed = std::getenv("PIH_SEED")) {
    try {
      cfg.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw ConfigError("PIH_SEED is not a valid integer");
    }
  }
  if (args.seed_flag) cfg.seed = *args.seed_flag;  // flag > env > config
  return cfg;
}

fs::path ensure_out_dir(const CommonArgs& args) {
  fs::path dir(args.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << j.dump(2) << '\n';
}

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

RbfKernelParams kernel_from_options(const TrainOptions& t, FeatureMode mode) {
  RbfKernelParams p;
  p.lengthscale.assign(feature_indices(mode).size(), t.lengthscale);
  p.signal_variance = t.signal_variance;
  p.noise_variance = t.noise_variance;
  return p;
}

// Picks the lengthscale from {0.3, 1, 3} minimizing summed validation RMSE of
// the two magnitude regressors on an internal 80/20 split.
double grid_search_lengthscale(const Dataset& data, const TrainOptions& opts,
                               std::uint64_t seed) {
  const auto split =
      split_dataset(static_cast<int>(data.records.size()), seed, 0.8);
  Dataset train;
  for (int i : split.train) {
    train.records.push_back(data.records[static_cast<std::size_t>(i)]);
  }
  double best_ls = 1.0;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (double ls : {0.3, 1.0, 3.0}) {
    TrainOptions cand = opts;
    cand.lengthscale = ls;
    const auto params = kernel_from_options(cand, opts.feature_mode);
    double total = 0.0;
    for (int axis : {0, 1}) {
      const auto reg =
          MagnitudeRegressor::fit(train, axis, opts.feature_mode, params);
      double sq = 0.0;
      for (int i : split.test) {
        const auto& rec = data.records[static_cast<std::size_t>(i)];
        const double truth =
            std::abs(axis == 0 ? rec.misalignment.dx : rec.misalignment.dy);
        const double err = reg.predict(rec.features).mean - truth;
        sq += err * err;
      }
      total += std::sqrt(sq / static_cast<double>(split.test.size()));
    }
    if (total < best_rmse) {
      best_rmse = total;
      best_ls = ls;
    }
  }
  return best_ls;
}

int cmd_collect(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out_dir(args);
  const SimSetup setup = cfg.sim_setup(cfg.collect_controller);
  const Dataset data = collect_dataset(setup, cfg.collect_n, cfg.seed);
  data.save_csv((out / "dataset.csv").string());
  nlohmann::json meta{{"n", cfg.collect_n},
                      {"controller", controller_name(cfg.collect_controller)},
                      {"seed", cfg.seed},
                      {"config", cfg.to_json()}};
  write_json(out / "meta.json", meta);
  std::cout << "wrote " << (out / "dataset.csv").string() << " ("
            << data.records.size() << " records)\n";
  return 0;
}

int cmd_analyze(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out_dir(args);
  const SimSetup setup = cfg.sim_setup(cfg.analyze_controller);

  if (cfg.analyze_episodes < 2) {
    throw ConfigError("analyze.n_episodes must be >= 2");
  }
  Rng label_rng(mix_seed(cfg.seed, 0x1abe1));
  std::vector<EpisodeLog> logs;
  logs.reserve(static_cast<std::size_t>(cfg.analyze_episodes));
  for (int i = 0; i < cfg.analyze_episodes; ++i) {
    PlanarMisalignment mis;
    if (cfg.analyze_misalignment >= 0.0) {
      mis = {cfg.analyze_misalignment, 0.0};
      label_rng.uniform(-3.0, 3.0);  // keep the stream layout identical
      label_rng.uniform(-3.0, 3.0);
    } else {
      mis = {label_rng.uniform(-3.0, 3.0), label_rng.uniform(-3.0, 3.0)};
    }
    EnvConfig env = setup.env;
    env.seed = mix_seed(cfg.seed, 0xE9150000ULL + static_cast<std::uint64_t>(i));
    logs.push_back(run_episode(setup.controller, env, setup.trajectory, mis));
  }

  const EnsembleStats stats =
      ensemble_statistics(logs, cfg.convergence.window_len);
  const auto detected =
      detect_convergence(stats.statistic_series(), cfg.convergence);

  std::ofstream csv(out / "convergence.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write convergence.csv");
  csv << "window,mean_fz,two_sigma,ens_mean,ci_half,esig,ssig\n";
  for (std::size_t w = 0; w < stats.mean_of_means.size(); ++w) {
    csv << w << ',' << format_double(stats.pooled_mean[w]) << ','
        << format_double(stats.pooled_two_sigma[w]) << ','
        << format_double(stats.mean_of_means[w]) << ','
        << format_double(stats.ci_half[w]) << ','
        << format_double(stats.mean_two_sigma[w]) << ','
        << format_double(stats.std_two_sigma[w]) << '\n';
  }

  nlohmann::json result{
      {"n_episodes", cfg.analyze_episodes},
      {"controller", controller_name(cfg.analyze_controller)},
      {"detected_window", nullptr}};
  if (detected) {
    result["detected_window"] = *detected;
    result["detected_time_s"] = static_cast<double>(*detected) *
                                cfg.convergence.window_len;
  }
  write_json(out / "convergence.json", result);
  std::cout << result.dump() << '\n';
  return 0;
}

int cmd_train(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out_dir(args);
  const fs::path dataset_path = out / "dataset.csv";
  if (!fs::exists(dataset_path)) {
    throw ConfigError("no dataset.csv in " + out.string() +
                      " (run collect first)");
  }
  const Dataset data = Dataset::load_csv(dataset_path.string());
  if (data.records.empty()) throw ConfigError("dataset is empty");

  TrainOptions opts = cfg.train;
  if (opts.grid_search) {
    opts.lengthscale = grid_search_lengthscale(data, opts, cfg.seed);
  }
  const auto params = kernel_from_options(opts, opts.feature_mode);

  nlohmann::json model{
      {"v", 1},
      {"controller", controller_name(data.records.front().controller)},
      {"feature_mode", feature_mode_name(opts.feature_mode)},
      {"lengthscale", opts.lengthscale}};
  for (int axis : {0, 1}) {
    const auto cls =
        DirectionClassifier::fit(data, axis, opts.feature_mode, params);
    const auto reg =
        MagnitudeRegressor::fit(data, axis, opts.feature_mode, params);
    const char* name = axis == 0 ? "x" : "y";
    model["classifiers"][name] = cls.to_json();
    model["regressors"][name] = reg.to_json();
  }
  write_json(out / "model.json", model);
  std::cout << "wrote " << (out / "model.json").string() << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out_dir(args);
  const fs::path dataset_path = out / "dataset.csv";
  if (!fs::exists(dataset_path)) {
    throw ConfigError("no dataset.csv in " + out.string());
  }
  const Dataset data = Dataset::load_csv(dataset_path.string());
  const auto params = kernel_from_options(cfg.train, FeatureMode::full);
  const EvaluationReport report = evaluate_models(data, cfg.seed, params);
  write_json(out / "report.json", report.to_json());
  std::cout << report.to_table();
  return 0;
}

int cmd_insert(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path out = ensure_out_dir(args);
  const fs::path model_path = out / "model.json";
  if (!fs::exists(model_path)) {
    throw ConfigError("no model.json in " + out.string() +
                      " (run train first)");
  }
  const nlohmann::json model = load_json(model_path);
  GpDirectionPredictor predictor(
      DirectionClassifier::from_json(model.at("classifiers").at("x")),
      DirectionClassifier::from_json(model.at("classifiers").at("y")));

  const SimSetup setup = cfg.sim_setup(cfg.insert_controller);
  const RunSummary summary = evaluate_policy(
      setup, predictor, cfg.policy, cfg.insert_trials, cfg.seed);
  write_json(out / "summary.json", summary.to_json());
  std::cout << "success_rate " << summary.success_rate
            << "  mean_corrections " << summary.mean_corrections << " over "
            << summary.n_trials << " trials\n";
  return 0;
}

int cmd_report(const CommonArgs& args) {
  load_config(args);  // validates the config even though nothing is simulated
  const fs::path out = ensure_out_dir(args);
  std::ostringstream os;
  os << "run artifacts in " << out.string() << "\n";

  if (fs::exists(out / "dataset.csv")) {
    const Dataset data = Dataset::load_csv((out / "dataset.csv").string());
    os << "dataset.csv: " << data.records.size() << " records";
    if (!data.records.empty()) {
      os << " (" << controller_name(data.records.front().controller)
         << " controller)";
    }
    os << "\n";
  }
  if (fs::exists(out / "convergence.json")) {
    const auto j = load_json(out / "convergence.json");
    os << "convergence: detected_window=" << j.at("detected_window").dump()
       << " over " << j.at("n_episodes").get<int>() << " episodes\n";
  }
  if (fs::exists(out / "model.json")) {
    const auto j = load_json(out / "model.json");
    os << "model.json: " << j.at("feature_mode").get<std::string>()
       << " features, " << j.at("controller").get<std::string>()
       << " controller\n";
  }
  if (fs::exists(out / "report.json")) {
    const auto j = load_json(out / "report.json");
    os << "model evaluation (" << j.at("rows").size() << " rows):\n";
    for (const auto& r : j.at("rows")) {
      os << "  axis " << r.at("axis").get<std::string>() << " "
         << r.at("feature_mode").get<std::string>()
         << ": accuracy=" << r.at("accuracy").get<double>()
         << " rmse=" << r.at("rmse").get<double>() << "\n";
    }
  }
  if (fs::exists(out / "summary.json")) {
    const auto j = load_json(out / "summary.json");
    os << "insertion: success_rate=" << j.at("success_rate").get<double>()
       << " mean_corrections=" << j.at("mean_corrections").get<double>()
       << " over " << j.at("n_trials").get<int>() << " trials\n";
  }

  const std::string text = os.str();
  std::ofstream file(out / "report.txt", std::ios::binary);
  file << text;
  std::cout << text;
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"planar peg-in-hole insertion lab"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed_value = 0;
  std::vector<CLI::Option*> seed_options;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run-config JSON path")
        ->required();
    sub->add_option("--out", common.out_dir, "output directory")->required();
    seed_options.push_back(
        sub->add_option("--seed", seed_value, "override the config seed"));
  };

  CLI::App* collect = app.add_subcommand("collect", "simulate a dataset");
  CLI::App* analyze = app.add_subcommand(
      "analyze-convergence", "ensemble force statistics + detection");
  CLI::App* train = app.add_subcommand("train", "fit models from dataset.csv");
  CLI::App* evaluate = app.add_subcommand(
      "evaluate-models", "held-out accuracy/RMSE, full vs reduced features");
  CLI::App* insert =
      app.add_subcommand("insert", "closed-loop insertion trials");
  CLI::App* report =
      app.add_subcommand("report", "summarize artifacts in the out directory");
  for (CLI::App* sub : {collect, analyze, train, evaluate, insert, report}) {
    add_common(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help("", CLI::AppFormatMode::Normal);
    return 1;
  }
  for (const CLI::Option* opt : seed_options) {
    if (opt->count() > 0) common.seed_flag = seed_value;
  }

  try {
    if (collect->parsed()) return cmd_collect(common);
    if (analyze->parsed()) return cmd_analyze(common);
    if (train->parsed()) return cmd_train(common);
    if (evaluate->parsed()) return cmd_evaluate(common);
    if (insert->parsed()) return cmd_insert(common);
    if (report->parsed()) return cmd_report(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace pih
