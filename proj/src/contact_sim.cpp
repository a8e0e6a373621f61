#include "pih/contact_sim.hpp"

#include <algorithm>
#include <cmath>

namespace pih {

void EnvConfig::validate() const {
  for (double k : stiffness) {
    if (!(k > 0.0)) throw InvalidSpecError("stiffness components must be > 0");
  }
  if (!(hole_clearance > 0.0)) {
    throw InvalidSpecError("hole_clearance must be > 0");
  }
  if (noise_sigma < 0.0) throw InvalidSpecError("noise_sigma must be >= 0");
  if (!(peg_radius > 0.0)) throw InvalidSpecError("peg_radius must be > 0");
  if (!(lateral_shape > 0.0)) {
    throw InvalidSpecError("lateral_shape must be > 0");
  }
}

EnvState resolve_position(const EnvConfig& cfg, const Position3& commanded) {
  const double dx = commanded.x - cfg.hole_center_x;
  const double dy = commanded.y - cfg.hole_center_y;
  const double offset = std::hypot(dx, dy);

  EnvState state;
  if (offset < cfg.hole_clearance) {
    state.peg = commanded;
    state.in_hole = commanded.z < cfg.surface_z;
    state.contact_depth = 0.0;
  } else {
    state.peg = {commanded.x, commanded.y,
                 std::max(commanded.z, cfg.surface_z)};
    state.in_hole = false;
    state.contact_depth = std::max(0.0, cfg.surface_z - commanded.z);
  }
  return state;
}

Wrench observe_wrench(const EnvConfig& cfg, const EnvState& state,
                      const Position3& commanded, Rng& rng) {
  const double normal = cfg.stiffness[2] * (state.peg.z - commanded.z);
  const double dx = commanded.x - cfg.hole_center_x;
  const double dy = commanded.y - cfg.hole_center_y;
  const double tx = std::tanh(dx / cfg.lateral_shape);
  const double ty = std::tanh(dy / cfg.lateral_shape);

  Wrench w;
  w.fx = -cfg.friction_gain * normal * tx;
  w.fy = -cfg.friction_gain * normal * ty;
  w.fz = normal;
  w.mx = cfg.moment_gain * normal * ty;
  w.my = -cfg.moment_gain * normal * tx;
  w.mz = 0.0;

  if (cfg.noise_sigma > 0.0) {
    w.fx += rng.gaussian(0.0, cfg.noise_sigma);
    w.fy += rng.gaussian(0.0, cfg.noise_sigma);
    w.fz += rng.gaussian(0.0, cfg.noise_sigma);
    w.mx += rng.gaussian(0.0, cfg.noise_sigma);
    w.my += rng.gaussian(0.0, cfg.noise_sigma);
    w.mz += rng.gaussian(0.0, cfg.noise_sigma);
  }
  return w;
}

std::pair<EnvState, Wrench> ContactEnv::step(const Position3& commanded) {
  EnvState state = resolve_position(cfg_, commanded);
  Wrench w = observe_wrench(cfg_, state, commanded, rng_);
  return {state, w};
}

}  // namespace pih
