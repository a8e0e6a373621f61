// Force-feedback accommodation controllers.
//
// Both controllers modify a constant-velocity reference so that contact
// forces stay bounded: the linear law folds a discounted sum of past forces
// into the commanded position, the nonlinear law attenuates the reference
// advance through a logistic gate on the current force magnitude.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pih/contact_sim.hpp"
#include "pih/core.hpp"

namespace pih {

struct LinearAccommodationConfig {
  std::array<double, 3> ka{0.02, 0.02, 0.02};  // mm/N, per axis
  double gamma = 0.35;  // discount; stable working interval here: (0.3, 0.6)

  void validate() const;
};

// Per-episode state of the linear law. e is the running discounted feedback
// term (mm); it starts at zero.
struct LinearState {
  std::array<double, 3> e{0.0, 0.0, 0.0};
  Position3 x_c_prev;
};

// One control tick: e[k] = gamma*(e[k-1] + Ka∘f[k-1]), which equals the
// explicit discounted sum over the whole force history, then
// x_c = x_c_prev + delta_xr + e[k]. The measured wrench already opposes
// commanded penetration (fz > 0 against a downward advance), so the force is
// fed back unflipped. Throws SensorFaultError on non-finite forces.
Position3 linear_command(LinearState& state, const Vec3& delta_xr,
                         const Wrench& f_prev,
                         const LinearAccommodationConfig& cfg);

// Analytic fixed point of the linear loop against a rigid surface: the force
// at which the feedback term cancels the reference advance exactly.
// Returns -delta_xr*(1-gamma)/(ka*gamma).
double steady_state_force_linear(double delta_xr, double ka, double gamma);

struct NonlinearAccommodationConfig {
  double ka = 4.0;     // 1/N, sigmoid sharpness
  double f_sat = 5.0;  // N, force level around which the advance stalls

  void validate() const;
};

// Logistic gate 1/(1+exp(-ka*(f-f_sat))) in (0, 1).
double sigmoid_alpha(double f, double ka, double f_sat);

// One control tick: x_c = x_c_prev + (1-alpha)*delta_xr per axis, with alpha
// computed from that axis's force magnitude. Axes with zero reference advance
// are untouched by construction. Throws SensorFaultError on non-finite
// forces.
Position3 nonlinear_command(const Position3& x_c_prev, const Vec3& delta_xr,
                            const Wrench& f,
                            const NonlinearAccommodationConfig& cfg);

using ControllerConfig =
    std::variant<LinearAccommodationConfig, NonlinearAccommodationConfig>;

enum class ControllerKind { linear, nonlinear };

ControllerKind controller_kind(const ControllerConfig& cfg);
std::string controller_name(ControllerKind kind);
ControllerKind controller_kind_from_name(const std::string& name);

struct EpisodeRecord {
  double t = 0.0;
  Position3 x_r;  // reference
  Position3 x_c;  // commanded
  Position3 x;    // actual
  Wrench wrench;
};

struct EpisodeMeta {
  ControllerKind kind = ControllerKind::linear;
  LinearAccommodationConfig linear;
  NonlinearAccommodationConfig nonlinear;
  std::uint64_t env_seed = 0;
  PlanarMisalignment misalignment;
  double dt = 0.02;
  bool aborted = false;
  std::string abort_reason;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> records;
  EpisodeMeta meta;

  std::vector<double> fz_series() const;

  // Fixed column order: t,x,y,z,fx,fy,fz,mx,my,mz (actual position + wrench).
  void save_csv(const std::string& path) const;
  static std::vector<EpisodeRecord> load_csv(const std::string& path);

  void save_meta_json(const std::string& path) const;
};

// Runs one closed-loop episode: command -> resolve -> observe -> log, for
// traj.num_ticks ticks. The reference aims straight down at
// hole_center + misalignment (traj.start.xy is an extra offset on top,
// normally zero). A sensor fault aborts the episode; the partial log is
// returned with the abort annotated.
EpisodeLog run_episode(const ControllerConfig& controller,
                       const EnvConfig& env_cfg, const TrajectorySpec& traj,
                       const PlanarMisalignment& misalignment);

}  // namespace pih
