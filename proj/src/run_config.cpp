#include "pih/run_config.hpp"

#include <fstream>

namespace pih {

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec3(const nlohmann::json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const auto arr = j.at(key).get<std::vector<double>>();
  if (arr.size() != 3) {
    throw ConfigError(std::string("field '") + key + "' must have 3 entries");
  }
  out = {arr[0], arr[1], arr[2]};
}

ControllerKind read_controller(const nlohmann::json& j, const char* key,
                               ControllerKind fallback) {
  if (!j.contains(key)) return fallback;
  return controller_kind_from_name(j.at(key).get<std::string>());
}

}  // namespace

ControllerConfig RunConfig::controller(ControllerKind kind) const {
  if (kind == ControllerKind::linear) return linear;
  return nonlinear;
}

SimSetup RunConfig::sim_setup(ControllerKind kind) const {
  SimSetup setup;
  setup.env = env;
  setup.controller = controller(kind);
  setup.trajectory = trajectory;
  setup.convergence = convergence;
  return setup;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (j.contains("v") && j.at("v").get<int>() != 1) {
    throw ConfigError("unsupported config schema version");
  }
  RunConfig cfg;
  read_if(j, "seed", cfg.seed);

  if (j.contains("env")) {
    const auto& e = j.at("env");
    if (e.contains("stiffness")) {
      const auto arr = e.at("stiffness").get<std::vector<double>>();
      if (arr.size() != 3) throw ConfigError("stiffness must have 3 entries");
      cfg.env.stiffness = {arr[0], arr[1], arr[2]};
    }
    read_if(e, "peg_radius", cfg.env.peg_radius);
    read_if(e, "hole_clearance", cfg.env.hole_clearance);
    read_if(e, "surface_z", cfg.env.surface_z);
    if (e.contains("hole_center")) {
      const auto arr = e.at("hole_center").get<std::vector<double>>();
      if (arr.size() != 2) throw ConfigError("hole_center must have 2 entries");
      cfg.env.hole_center_x = arr[0];
      cfg.env.hole_center_y = arr[1];
    }
    read_if(e, "friction_gain", cfg.env.friction_gain);
    read_if(e, "moment_gain", cfg.env.moment_gain);
    read_if(e, "lateral_shape", cfg.env.lateral_shape);
    read_if(e, "noise_sigma", cfg.env.noise_sigma);
  }

  if (j.contains("linear")) {
    const auto& l = j.at("linear");
    if (l.contains("ka")) {
      const auto arr = l.at("ka").get<std::vector<double>>();
      if (arr.size() != 3) throw ConfigError("linear ka must have 3 entries");
      cfg.linear.ka = {arr[0], arr[1], arr[2]};
    }
    read_if(l, "gamma", cfg.linear.gamma);
  }
  if (j.contains("nonlinear")) {
    const auto& n = j.at("nonlinear");
    read_if(n, "ka", cfg.nonlinear.ka);
    read_if(n, "f_sat", cfg.nonlinear.f_sat);
  }

  if (j.contains("trajectory")) {
    const auto& t = j.at("trajectory");
    read_vec3(t, "start", cfg.trajectory.start);
    read_vec3(t, "direction", cfg.trajectory.direction);
    read_if(t, "speed", cfg.trajectory.speed);
    read_if(t, "num_ticks", cfg.trajectory.num_ticks);
    read_if(t, "dt", cfg.trajectory.dt);
  }

  if (j.contains("convergence")) {
    const auto& c = j.at("convergence");
    read_if(c, "eta_th", cfg.convergence.eta_th);
    read_if(c, "consecutive_required", cfg.convergence.consecutive_required);
    read_if(c, "window_len", cfg.convergence.window_len);
  }

  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    read_if(p, "step_size", cfg.policy.step_size);
    read_if(p, "max_corrections", cfg.policy.max_corrections);
    read_if(p, "divergence_limit", cfg.policy.divergence_limit);
    read_if(p, "success_depth", cfg.policy.success_depth);
    read_if(p, "decision_gate", cfg.policy.decision_gate);
  }

  if (j.contains("collect")) {
    const auto& c = j.at("collect");
    read_if(c, "n", cfg.collect_n);
    cfg.collect_controller =
        read_controller(c, "controller", cfg.collect_controller);
  }
  if (j.contains("analyze")) {
    const auto& a = j.at("analyze");
    read_if(a, "n_episodes", cfg.analyze_episodes);
    cfg.analyze_controller =
        read_controller(a, "controller", cfg.analyze_controller);
    read_if(a, "misalignment", cfg.analyze_misalignment);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    if (t.contains("feature_mode")) {
      cfg.train.feature_mode =
          feature_mode_from_name(t.at("feature_mode").get<std::string>());
    }
    read_if(t, "lengthscale", cfg.train.lengthscale);
    read_if(t, "signal_variance", cfg.train.signal_variance);
    read_if(t, "noise_variance", cfg.train.noise_variance);
    read_if(t, "grid_search", cfg.train.grid_search);
  }
  if (j.contains("insert")) {
    const auto& i = j.at("insert");
    read_if(i, "n_trials", cfg.insert_trials);
    cfg.insert_controller =
        read_controller(i, "controller", cfg.insert_controller);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config json: " + std::string(e.what()));
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{
      {"v", 1},
      {"seed", seed},
      {"env",
       {{"stiffness", env.stiffness},
        {"peg_radius", env.peg_radius},
        {"hole_clearance", env.hole_clearance},
        {"surface_z", env.surface_z},
        {"hole_center", {env.hole_center_x, env.hole_center_y}},
        {"friction_gain", env.friction_gain},
        {"moment_gain", env.moment_gain},
        {"lateral_shape", env.lateral_shape},
        {"noise_sigma", env.noise_sigma}}},
      {"linear", {{"ka", linear.ka}, {"gamma", linear.gamma}}},
      {"nonlinear", {{"ka", nonlinear.ka}, {"f_sat", nonlinear.f_sat}}},
      {"trajectory",
       {{"start", {trajectory.start.x, trajectory.start.y, trajectory.start.z}},
        {"direction",
         {trajectory.direction.x, trajectory.direction.y,
          trajectory.direction.z}},
        {"speed", trajectory.speed},
        {"num_ticks", trajectory.num_ticks},
        {"dt", trajectory.dt}}},
      {"convergence",
       {{"eta_th", convergence.eta_th},
        {"consecutive_required", convergence.consecutive_required},
        {"window_len", convergence.window_len}}},
      {"policy",
       {{"step_size", policy.step_size},
        {"max_corrections", policy.max_corrections},
        {"divergence_limit", policy.divergence_limit},
        {"success_depth", policy.success_depth},
        {"decision_gate", policy.decision_gate}}},
      {"collect",
       {{"n", collect_n},
        {"controller", controller_name(collect_controller)}}},
      {"analyze",
       {{"n_episodes", analyze_episodes},
        {"controller", controller_name(analyze_controller)},
        {"misalignment", analyze_misalignment}}},
      {"train",
       {{"feature_mode", feature_mode_name(train.feature_mode)},
        {"lengthscale", train.lengthscale},
        {"signal_variance", train.signal_variance},
        {"noise_variance", train.noise_variance},
        {"grid_search", train.grid_search}}},
      {"insert",
       {{"n_trials", insert_trials},
        {"controller", controller_name(insert_controller)}}}};
}

}  // namespace pih
