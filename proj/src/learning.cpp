#include "pih/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pih/csv.hpp"
#include "pih/rng.hpp"

namespace pih {

void Dataset::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "dx,dy,fx,fy,fz,mx,my,mz,controller,seed\n";
  for (const auto& r : records) {
    out << format_double(r.misalignment.dx) << ','
        << format_double(r.misalignment.dy) << ','
        << format_double(r.features.fx) << ',' << format_double(r.features.fy)
        << ',' << format_double(r.features.fz) << ','
        << format_double(r.features.mx) << ',' << format_double(r.features.my)
        << ',' << format_double(r.features.mz) << ','
        << controller_name(r.controller) << ',' << r.seed << '\n';
  }
}

Dataset Dataset::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
  Dataset data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw std::runtime_error("bad row in " + path);
    DatasetRecord r;
    r.misalignment = {parse_double(f[0]), parse_double(f[1])};
    r.features = {parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                  parse_double(f[5]), parse_double(f[6]), parse_double(f[7])};
    r.controller = controller_kind_from_name(std::string(f[8]));
    r.seed = std::stoull(std::string(f[9]));
    data.records.push_back(r);
  }
  return data;
}

std::string feature_mode_name(FeatureMode mode) {
  return mode == FeatureMode::full ? "full" : "reduced";
}

FeatureMode feature_mode_from_name(const std::string& name) {
  if (name == "full") return FeatureMode::full;
  if (name == "reduced") return FeatureMode::reduced;
  throw ConfigError("unknown feature mode '" + name + "'");
}

std::vector<int> feature_indices(FeatureMode mode) {
  if (mode == FeatureMode::full) return {0, 1, 2, 3, 4, 5};
  return {0, 1, 3, 4};
}

std::vector<std::string> feature_names(FeatureMode mode) {
  const std::vector<std::string> all{"fx", "fy", "fz", "mx", "my", "mz"};
  std::vector<std::string> out;
  for (int i : feature_indices(mode)) {
    out.push_back(all[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<double> select_features(const Wrench& w, FeatureMode mode) {
  const std::array<double, 6> all{w.fx, w.fy, w.fz, w.mx, w.my, w.mz};
  std::vector<double> out;
  for (int i : feature_indices(mode)) {
    out.push_back(all[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::optional<Wrench> steady_feature_snapshot(
    const EpisodeLog& log, const ConvergenceCriterionConfig& cfg) {
  const auto fz = log.fz_series();
  const auto detected = detect_convergence_online(fz, log.meta.dt, cfg);
  if (!detected) return std::nullopt;
  const auto ticks_per_window = static_cast<std::size_t>(
      std::llround(cfg.window_len / log.meta.dt));
  const std::size_t begin = *detected * ticks_per_window;
  Wrench mean;
  for (std::size_t i = begin; i < begin + ticks_per_window; ++i) {
    const Wrench& w = log.records[i].wrench;
    mean.fx += w.fx;
    mean.fy += w.fy;
    mean.fz += w.fz;
    mean.mx += w.mx;
    mean.my += w.my;
    mean.mz += w.mz;
  }
  const double n = static_cast<double>(ticks_per_window);
  mean.fx /= n;
  mean.fy /= n;
  mean.fz /= n;
  mean.mx /= n;
  mean.my /= n;
  mean.mz /= n;
  return mean;
}

Dataset collect_dataset(const SimSetup& setup, int n,
                        std::uint64_t master_seed) {
  if (n < 1) throw InvalidSpecError("collection size must be >= 1");
  Rng label_rng(mix_seed(master_seed, 0x1abe1));
  Dataset data;
  data.records.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    PlanarMisalignment mis{label_rng.uniform(-3.0, 3.0),
                           label_rng.uniform(-3.0, 3.0)};
    EnvConfig env = setup.env;
    env.seed = mix_seed(master_seed, 0xE9150000ULL + static_cast<std::uint64_t>(i));

    EpisodeLog log = run_episode(setup.controller, env, setup.trajectory, mis);
    auto snapshot = steady_feature_snapshot(log, setup.convergence);
    if (!snapshot) {
      // one retry on a doubled horizon
      TrajectorySpec longer = setup.trajectory;
      longer.num_ticks *= 2;
      log = run_episode(setup.controller, env, longer, mis);
      snapshot = steady_feature_snapshot(log, setup.convergence);
      if (!snapshot) {
        throw CollectionError("episode with seed " + std::to_string(env.seed) +
                              " never converged");
      }
    }
    data.records.push_back(
        {mis, *snapshot, controller_kind(setup.controller), env.seed});
  }
  return data;
}

namespace {

double axis_component(const PlanarMisalignment& m, int axis) {
  return axis == 0 ? m.dx : m.dy;
}

Eigen::MatrixXd feature_matrix(const Dataset& data, FeatureMode mode,
                               const std::vector<int>& idx) {
  const auto cols = feature_indices(mode);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()),
                    static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto feats = select_features(
        data.records[static_cast<std::size_t>(idx[r])].features, mode);
    for (std::size_t c = 0; c < feats.size(); ++c) {
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = feats[c];
    }
  }
  return X;
}

Eigen::VectorXd wrench_to_vector(const Wrench& w, FeatureMode mode) {
  const auto feats = select_features(w, mode);
  return Eigen::Map<const Eigen::VectorXd>(
      feats.data(), static_cast<Eigen::Index>(feats.size()));
}

std::vector<int> all_indices(const Dataset& data) {
  std::vector<int> idx(data.records.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

RbfKernelParams default_kernel_params(FeatureMode mode) {
  RbfKernelParams p;
  p.lengthscale.assign(feature_indices(mode).size(), 1.0);
  p.signal_variance = 1.0;
  p.noise_variance = 0.01;
  return p;
}

DirectionClassifier DirectionClassifier::fit(const Dataset& data, int axis,
                                             FeatureMode mode,
                                             const RbfKernelParams& params) {
  const auto idx = all_indices(data);
  bool has_pos = false, has_neg = false;
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double d = axis_component(
        data.records[static_cast<std::size_t>(idx[r])].misalignment, axis);
    const double label = d >= 0.0 ? 1.0 : -1.0;
    if (label > 0) has_pos = true;
    else has_neg = true;
    y(static_cast<Eigen::Index>(r)) = label;
  }
  if (!has_pos || !has_neg) {
    throw DegenerateDataError("direction labels contain a single class");
  }
  DirectionClassifier c;
  c.gp_ = GpRegressor::fit(feature_matrix(data, mode, idx), y, params);
  c.axis_ = axis;
  c.mode_ = mode;
  return c;
}

int DirectionClassifier::predict(const Wrench& features) const {
  return decision_value(features) >= 0.0 ? 1 : -1;  // tie breaks to +1
}

double DirectionClassifier::decision_value(const Wrench& features) const {
  return gp_.predict(wrench_to_vector(features, mode_)).mean;
}

nlohmann::json DirectionClassifier::to_json() const {
  nlohmann::json j;
  j["axis"] = axis_;
  j["feature_mode"] = feature_mode_name(mode_);
  j["gp"] = gp_.to_json();
  return j;
}

DirectionClassifier DirectionClassifier::from_json(const nlohmann::json& j) {
  DirectionClassifier c;
  c.axis_ = j.at("axis").get<int>();
  c.mode_ = feature_mode_from_name(j.at("feature_mode").get<std::string>());
  c.gp_ = GpRegressor::from_json(j.at("gp"));
  return c;
}

MagnitudeRegressor MagnitudeRegressor::fit(const Dataset& data, int axis,
                                           FeatureMode mode,
                                           const RbfKernelParams& params) {
  const auto idx = all_indices(data);
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    y(static_cast<Eigen::Index>(r)) = std::abs(axis_component(
        data.records[static_cast<std::size_t>(idx[r])].misalignment, axis));
  }
  MagnitudeRegressor m;
  m.gp_ = GpRegressor::fit(feature_matrix(data, mode, idx), y, params);
  m.axis_ = axis;
  m.mode_ = mode;
  return m;
}

GpPrediction MagnitudeRegressor::predict(const Wrench& features) const {
  return gp_.predict(wrench_to_vector(features, mode_));
}

nlohmann::json MagnitudeRegressor::to_json() const {
  nlohmann::json j;
  j["axis"] = axis_;
  j["feature_mode"] = feature_mode_name(mode_);
  j["gp"] = gp_.to_json();
  return j;
}

MagnitudeRegressor MagnitudeRegressor::from_json(const nlohmann::json& j) {
  MagnitudeRegressor m;
  m.axis_ = j.at("axis").get<int>();
  m.mode_ = feature_mode_from_name(j.at("feature_mode").get<std::string>());
  m.gp_ = GpRegressor::from_json(j.at("gp"));
  return m;
}

SplitIndices split_dataset(int n, std::uint64_t seed, double train_fraction) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(seed, 0x5b117));
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_u64() %
                                    static_cast<std::uint64_t>(i + 1));
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  SplitIndices split;
  split.train.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
  split.test.assign(idx.begin() + static_cast<long>(n_train), idx.end());
  return split;
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"axis", r.axis == 0 ? "x" : "y"},
                   {"controller", controller_name(r.controller)},
                   {"feature_mode", feature_mode_name(r.feature_mode)},
                   {"accuracy", r.accuracy},
                   {"rmse", r.rmse}});
  }
  return nlohmann::json{{"rows", arr}};
}

std::string EvaluationReport::to_table() const {
  std::ostringstream os;
  os << "axis  controller  features  accuracy  rmse_mm\n";
  for (const auto& r : rows) {
    os << (r.axis == 0 ? "x" : "y") << "     " << controller_name(r.controller)
       << (r.controller == ControllerKind::linear ? "      " : "   ")
       << feature_mode_name(r.feature_mode)
       << (r.feature_mode == FeatureMode::full ? "      " : "   ") << r.accuracy
       << "  " << r.rmse << '\n';
  }
  return os.str();
}

const EvaluationRow& EvaluationReport::row(int axis, FeatureMode mode) const {
  for (const auto& r : rows) {
    if (r.axis == axis && r.feature_mode == mode) return r;
  }
  throw std::runtime_error("missing evaluation row");
}

EvaluationReport evaluate_models(const Dataset& data, std::uint64_t split_seed,
                                 const RbfKernelParams& base_params) {
  if (data.records.size() < 100) {
    throw InsufficientDataError("model evaluation needs >= 100 records");
  }
  const auto split =
      split_dataset(static_cast<int>(data.records.size()), split_seed, 0.8);

  Dataset train;
  for (int i : split.train) {
    train.records.push_back(data.records[static_cast<std::size_t>(i)]);
  }

  EvaluationReport report;
  for (FeatureMode mode : {FeatureMode::full, FeatureMode::reduced}) {
    RbfKernelParams params = base_params;
    params.lengthscale.assign(feature_indices(mode).size(),
                              base_params.lengthscale.empty()
                                  ? 1.0
                                  : base_params.lengthscale.front());
    for (int axis : {0, 1}) {
      const auto classifier =
          DirectionClassifier::fit(train, axis, mode, params);
      const auto regressor = MagnitudeRegressor::fit(train, axis, mode, params);

      int correct = 0;
      double sq_err = 0.0;
      for (int i : split.test) {
        const auto& rec = data.records[static_cast<std::size_t>(i)];
        const double d = axis_component(rec.misalignment, axis);
        const int truth = d >= 0.0 ? 1 : -1;
        if (classifier.predict(rec.features) == truth) ++correct;
        const double err =
            regressor.predict(rec.features).mean - std::abs(d);
        sq_err += err * err;
      }
      EvaluationRow row;
      row.axis = axis;
      row.controller = data.records.front().controller;
      row.feature_mode = mode;
      row.accuracy =
          static_cast<double>(correct) / static_cast<double>(split.test.size());
      row.rmse = std::sqrt(sq_err / static_cast<double>(split.test.size()));
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace pih
