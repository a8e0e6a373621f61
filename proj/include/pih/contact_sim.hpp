// Synthetic planar peg-in-hole contact environment.
//
// The environment realizes a stiffness-controlled contact: the observed
// normal force is proportional to how far the commanded position penetrates
// the rigid surface. Lateral misalignment leaves a deterministic signature on
// the lateral forces and moments (a bounded, sign-preserving tanh shape),
// which is what the learning stage has to recover.

#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "pih/core.hpp"
#include "pih/rng.hpp"

namespace pih {

struct EnvConfig {
  std::array<double, 3> stiffness{10.0, 10.0, 10.0};  // Ks, N/mm
  double peg_radius = 10.0;                           // mm
  double hole_clearance = 0.5;                        // radial, mm
  double surface_z = 0.0;                             // mm
  double hole_center_x = 0.0;                         // mm
  double hole_center_y = 0.0;                         // mm
  double friction_gain = 0.10;                        // mu, dimensionless
  double moment_gain = 2.0;                           // c, mm
  double lateral_shape = 4.0;                         // s, mm
  double noise_sigma = 0.05;                          // N (N*mm on moments)
  std::uint64_t seed = 0;

  void validate() const;
};

struct EnvState {
  Position3 peg;               // actual peg position
  bool in_hole = false;
  double contact_depth = 0.0;  // max(0, surface_z - commanded z) when blocked
};

// Rigid-environment constraint. The peg descends freely when the lateral
// offset from the hole center is strictly below the clearance (an offset
// exactly equal to the clearance counts as blocked); otherwise the rim rests
// on the surface and z is clamped.
EnvState resolve_position(const EnvConfig& cfg, const Position3& commanded);

// Stiffness-model wrench at a resolved state. Normal force
// N = Ks_z*(z - z_commanded) >= 0; the lateral signature is
//   fx = -mu*N*tanh(dx/s)   fy = -mu*N*tanh(dy/s)
//   mx = +c*N*tanh(dy/s)    my = -c*N*tanh(dx/s)    mz = 0
// with (dx, dy) the commanded offset from the hole center, plus zero-mean
// Gaussian noise of std noise_sigma on every channel.
Wrench observe_wrench(const EnvConfig& cfg, const EnvState& state,
                      const Position3& commanded, Rng& rng);

// One environment instance per episode; it owns its noise stream.
class ContactEnv {
 public:
  explicit ContactEnv(const EnvConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
  }

  // resolve_position then observe_wrench for one commanded position.
  std::pair<EnvState, Wrench> step(const Position3& commanded);

  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  Rng rng_;
};

}  // namespace pih
