// Dataset collection under the accommodation controllers, quasi-steady
// feature extraction, misalignment direction/magnitude models, and model
// evaluation.
//
// Each collection episode draws a planar misalignment uniformly from
// [-3, 3]^2 mm, runs one insertion attempt, detects convergence of the
// vertical force online, and snapshots the mean wrench over the detection
// window as the episode's feature vector.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pih/accommodation.hpp"
#include "pih/contact_sim.hpp"
#include "pih/convergence.hpp"
#include "pih/core.hpp"
#include "pih/gp.hpp"

namespace pih {

struct DatasetRecord {
  PlanarMisalignment misalignment;  // label, mm
  Wrench features;                  // steady wrench snapshot
  ControllerKind controller = ControllerKind::linear;
  std::uint64_t seed = 0;           // per-episode environment seed
};

struct Dataset {
  std::vector<DatasetRecord> records;

  // Fixed column order: dx,dy,fx,fy,fz,mx,my,mz,controller,seed.
  void save_csv(const std::string& path) const;
  static Dataset load_csv(const std::string& path);
};

enum class FeatureMode { full, reduced };

std::string feature_mode_name(FeatureMode mode);
FeatureMode feature_mode_from_name(const std::string& name);

// full: all six channels; reduced: {fx, fy, mx, my} (drops indices 2 and 5).
std::vector<double> select_features(const Wrench& w, FeatureMode mode);
std::vector<int> feature_indices(FeatureMode mode);
std::vector<std::string> feature_names(FeatureMode mode);

// Everything needed to simulate one episode.
struct SimSetup {
  EnvConfig env;
  ControllerConfig controller;
  TrajectorySpec trajectory;
  ConvergenceCriterionConfig convergence;
};

// Runs n episodes with misalignments uniform on [-3,3]^2. Per-episode noise
// seeds derive from master_seed, so a rerun with the same seed yields a
// byte-identical dataset. Episodes that fail to converge are retried once
// with a doubled horizon; a second failure raises CollectionError naming the
// episode seed.
Dataset collect_dataset(const SimSetup& setup, int n,
                        std::uint64_t master_seed);

// Mean wrench over the detection window of an episode; nullopt when the
// online criterion never fires.
std::optional<Wrench> steady_feature_snapshot(
    const EpisodeLog& log, const ConvergenceCriterionConfig& cfg);

// Direction classifier: GP regression on the +/-1 direction labels of one
// axis; the predicted sign is the sign of the posterior mean (ties break to
// +1). The posterior mean itself is exposed as the decision value.
class DirectionClassifier {
 public:
  static DirectionClassifier fit(const Dataset& data, int axis,
                                 FeatureMode mode,
                                 const RbfKernelParams& params);

  int predict(const Wrench& features) const;
  double decision_value(const Wrench& features) const;

  int axis() const { return axis_; }
  FeatureMode mode() const { return mode_; }
  const GpRegressor& gp() const { return gp_; }

  nlohmann::json to_json() const;
  static DirectionClassifier from_json(const nlohmann::json& j);

 private:
  GpRegressor gp_;
  int axis_ = 0;
  FeatureMode mode_ = FeatureMode::full;
};

// Magnitude regressor: GP on |misalignment| of one axis.
class MagnitudeRegressor {
 public:
  static MagnitudeRegressor fit(const Dataset& data, int axis,
                                FeatureMode mode,
                                const RbfKernelParams& params);

  GpPrediction predict(const Wrench& features) const;

  int axis() const { return axis_; }
  FeatureMode mode() const { return mode_; }
  const GpRegressor& gp() const { return gp_; }

  nlohmann::json to_json() const;
  static MagnitudeRegressor from_json(const nlohmann::json& j);

 private:
  GpRegressor gp_;
  int axis_ = 0;
  FeatureMode mode_ = FeatureMode::full;
};

RbfKernelParams default_kernel_params(FeatureMode mode);

// Deterministic 80/20 shuffle split by seed.
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};
SplitIndices split_dataset(int n, std::uint64_t seed, double train_fraction);

struct EvaluationRow {
  int axis = 0;  // 0 = x, 1 = y
  ControllerKind controller = ControllerKind::linear;
  FeatureMode feature_mode = FeatureMode::full;
  double accuracy = 0.0;
  double rmse = 0.0;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;

  nlohmann::json to_json() const;
  std::string to_table() const;
  const EvaluationRow& row(int axis, FeatureMode mode) const;
};

// Fits direction classifiers and magnitude regressors per axis and feature
// mode on a deterministic 80/20 split and reports held-out accuracy/RMSE.
EvaluationReport evaluate_models(const Dataset& data, std::uint64_t split_seed,
                                 const RbfKernelParams& base_params);

}  // namespace pih
