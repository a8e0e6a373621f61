#include "pih/accommodation.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pih/csv.hpp"

namespace pih {

void LinearAccommodationConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidSpecError("gamma must lie in (0,1)");
  }
  for (double k : ka) {
    if (!(k > 0.0)) throw InvalidSpecError("ka components must be > 0");
  }
}

void NonlinearAccommodationConfig::validate() const {
  if (!(ka > 0.0)) throw InvalidSpecError("ka must be > 0");
  if (!(f_sat > 0.0)) throw InvalidSpecError("f_sat must be > 0");
}

Position3 linear_command(LinearState& state, const Vec3& delta_xr,
                         const Wrench& f_prev,
                         const LinearAccommodationConfig& cfg) {
  if (!f_prev.finite()) {
    throw SensorFaultError("non-finite force fed to linear controller");
  }
  for (int a = 0; a < 3; ++a) {
    state.e[a] = cfg.gamma * (state.e[a] + cfg.ka[a] * f_prev.force(a));
  }
  Position3 x_c{state.x_c_prev.x + delta_xr.x + state.e[0],
                state.x_c_prev.y + delta_xr.y + state.e[1],
                state.x_c_prev.z + delta_xr.z + state.e[2]};
  state.x_c_prev = x_c;
  return x_c;
}

double steady_state_force_linear(double delta_xr, double ka, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidSpecError("gamma must lie in (0,1)");
  }
  if (!(ka > 0.0)) throw InvalidSpecError("ka must be > 0");
  return -delta_xr * (1.0 - gamma) / (ka * gamma);
}

double sigmoid_alpha(double f, double ka, double f_sat) {
  return 1.0 / (1.0 + std::exp(-ka * (f - f_sat)));
}

Position3 nonlinear_command(const Position3& x_c_prev, const Vec3& delta_xr,
                            const Wrench& f,
                            const NonlinearAccommodationConfig& cfg) {
  if (!f.finite()) {
    throw SensorFaultError("non-finite force fed to nonlinear controller");
  }
  // alpha is driven by the per-axis force magnitude so the law treats pushing
  // and pulling contacts symmetrically.
  Position3 x_c = x_c_prev;
  const double ax = sigmoid_alpha(std::abs(f.fx), cfg.ka, cfg.f_sat);
  const double ay = sigmoid_alpha(std::abs(f.fy), cfg.ka, cfg.f_sat);
  const double az = sigmoid_alpha(std::abs(f.fz), cfg.ka, cfg.f_sat);
  x_c.x += (1.0 - ax) * delta_xr.x;
  x_c.y += (1.0 - ay) * delta_xr.y;
  x_c.z += (1.0 - az) * delta_xr.z;
  return x_c;
}

ControllerKind controller_kind(const ControllerConfig& cfg) {
  return std::holds_alternative<LinearAccommodationConfig>(cfg)
             ? ControllerKind::linear
             : ControllerKind::nonlinear;
}

std::string controller_name(ControllerKind kind) {
  return kind == ControllerKind::linear ? "linear" : "nonlinear";
}

ControllerKind controller_kind_from_name(const std::string& name) {
  if (name == "linear") return ControllerKind::linear;
  if (name == "nonlinear") return ControllerKind::nonlinear;
  throw ConfigError("unknown controller '" + name + "'");
}

std::vector<double> EpisodeLog::fz_series() const {
  std::vector<double> fz;
  fz.reserve(records.size());
  for (const auto& r : records) fz.push_back(r.wrench.fz);
  return fz;
}

void EpisodeLog::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,x,y,z,fx,fy,fz,mx,my,mz\n";
  for (const auto& r : records) {
    out << format_double(r.t) << ',' << format_double(r.x.x) << ','
        << format_double(r.x.y) << ',' << format_double(r.x.z) << ','
        << format_double(r.wrench.fx) << ',' << format_double(r.wrench.fy)
        << ',' << format_double(r.wrench.fz) << ','
        << format_double(r.wrench.mx) << ',' << format_double(r.wrench.my)
        << ',' << format_double(r.wrench.mz) << '\n';
  }
}

std::vector<EpisodeRecord> EpisodeLog::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
  std::vector<EpisodeRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw std::runtime_error("bad row in " + path);
    EpisodeRecord r;
    r.t = parse_double(f[0]);
    r.x = {parse_double(f[1]), parse_double(f[2]), parse_double(f[3])};
    r.wrench = {parse_double(f[4]), parse_double(f[5]), parse_double(f[6]),
                parse_double(f[7]), parse_double(f[8]), parse_double(f[9])};
    records.push_back(r);
  }
  return records;
}

void EpisodeLog::save_meta_json(const std::string& path) const {
  nlohmann::json j;
  j["controller"] = controller_name(meta.kind);
  if (meta.kind == ControllerKind::linear) {
    j["gamma"] = meta.linear.gamma;
    j["ka"] = meta.linear.ka;
  } else {
    j["ka"] = meta.nonlinear.ka;
    j["f_sat"] = meta.nonlinear.f_sat;
  }
  j["env_seed"] = meta.env_seed;
  j["misalignment"] = {meta.misalignment.dx, meta.misalignment.dy};
  j["dt"] = meta.dt;
  j["aborted"] = meta.aborted;
  if (meta.aborted) j["abort_reason"] = meta.abort_reason;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

EpisodeLog run_episode(const ControllerConfig& controller,
                       const EnvConfig& env_cfg, const TrajectorySpec& traj,
                       const PlanarMisalignment& misalignment) {
  traj.validate();
  env_cfg.validate();

  TrajectorySpec shifted = traj;
  shifted.start.x += env_cfg.hole_center_x + misalignment.dx;
  shifted.start.y += env_cfg.hole_center_y + misalignment.dy;
  const std::vector<Position3> reference =
      make_constant_velocity_trajectory(shifted);
  const Vec3 delta = shifted.per_tick_delta();

  EpisodeLog log;
  log.meta.kind = controller_kind(controller);
  if (const auto* lin = std::get_if<LinearAccommodationConfig>(&controller)) {
    lin->validate();
    log.meta.linear = *lin;
  } else {
    const auto& nl = std::get<NonlinearAccommodationConfig>(controller);
    nl.validate();
    log.meta.nonlinear = nl;
  }
  log.meta.env_seed = env_cfg.seed;
  log.meta.misalignment = misalignment;
  log.meta.dt = traj.dt;

  ContactEnv env(env_cfg);
  LinearState lin_state;
  lin_state.x_c_prev = reference.front();

  Position3 x_c = reference.front();
  auto [state, wrench] = env.step(x_c);
  log.records.push_back({0.0, reference.front(), x_c, state.peg, wrench});

  for (int k = 1; k <= traj.num_ticks; ++k) {
    try {
      if (const auto* lin =
              std::get_if<LinearAccommodationConfig>(&controller)) {
        x_c = linear_command(lin_state, delta, wrench, *lin);
      } else {
        x_c = nonlinear_command(
            x_c, delta, wrench,
            std::get<NonlinearAccommodationConfig>(controller));
      }
    } catch (const SensorFaultError& err) {
      log.meta.aborted = true;
      log.meta.abort_reason = err.what();
      break;
    }
    std::tie(state, wrench) = env.step(x_c);
    log.records.push_back(
        {k * traj.dt, reference[static_cast<std::size_t>(k)], x_c, state.peg,
         wrench});
  }
  return log;
}

}  // namespace pih
