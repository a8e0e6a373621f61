// Single-document JSON run configuration (schema version 1) shared by every
// CLI subcommand. All randomness flows from the one seed here; the CLI's
// --seed flag and the PIH_SEED environment variable override it
// (flag > env > file).

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "pih/accommodation.hpp"
#include "pih/contact_sim.hpp"
#include "pih/convergence.hpp"
#include "pih/core.hpp"
#include "pih/insertion.hpp"
#include "pih/learning.hpp"

namespace pih {

struct TrainOptions {
  FeatureMode feature_mode = FeatureMode::full;
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.01;
  bool grid_search = false;  // lengthscale in {0.3, 1, 3} by validation RMSE
};

struct RunConfig {
  std::uint64_t seed = 1;
  EnvConfig env;
  LinearAccommodationConfig linear;
  NonlinearAccommodationConfig nonlinear;
  TrajectorySpec trajectory;
  ConvergenceCriterionConfig convergence;
  PolicyConfig policy;

  int collect_n = 1200;
  ControllerKind collect_controller = ControllerKind::linear;

  int analyze_episodes = 20;
  ControllerKind analyze_controller = ControllerKind::linear;
  double analyze_misalignment = 2.0;  // fixed |dx| used for the ensemble

  TrainOptions train;

  int insert_trials = 20;
  ControllerKind insert_controller = ControllerKind::linear;

  ControllerConfig controller(ControllerKind kind) const;
  SimSetup sim_setup(ControllerKind kind) const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace pih
