// Shared geometric/signal types and reference-trajectory generation.
//
// Units are fixed project-wide: millimeters, newtons, seconds. The insertion
// axis is z, positive up; insertion advances in -z. Control runs at a fixed
// tick rate (default 50 Hz), so per-tick quantities are mm/tick.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pih {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, const Vec3& v) {
    return {s * v.x, s * v.y, s * v.z};
  }
  friend bool operator==(const Vec3& a, const Vec3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
};

// Task-frame position in mm.
using Position3 = Vec3;

// Force/torque observation: forces in N, moments in N*mm.
struct Wrench {
  double fx = 0.0, fy = 0.0, fz = 0.0;
  double mx = 0.0, my = 0.0, mz = 0.0;

  // Norm is defined over the force triple; moments are carried along as
  // features but never normed.
  double force_norm() const { return std::sqrt(fx * fx + fy * fy + fz * fz); }

  // Force component by axis index (0=x, 1=y, 2=z).
  double force(int axis) const {
    return axis == 0 ? fx : (axis == 1 ? fy : fz);
  }

  bool finite() const {
    return std::isfinite(fx) && std::isfinite(fy) && std::isfinite(fz) &&
           std::isfinite(mx) && std::isfinite(my) && std::isfinite(mz);
  }

  friend Wrench operator-(const Wrench& a, const Wrench& b) {
    return {a.fx - b.fx, a.fy - b.fy, a.fz - b.fz,
            a.mx - b.mx, a.my - b.my, a.mz - b.mz};
  }
};

// Planar offset (mm) of the peg axis from the true hole center.
struct PlanarMisalignment {
  double dx = 0.0;
  double dy = 0.0;
};

struct InvalidSpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SensorFaultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditionedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CollectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Positions are snapped to a 2^-26 mm grid (~15 pm, far below any physical
// scale here). Grid-aligned values below 2^27 mm accumulate exactly in
// doubles, so every first difference of a generated trajectory is
// bit-identical to the per-tick delta.
double snap_to_position_grid(double v);
Vec3 snap_to_position_grid(const Vec3& v);

// Constant-velocity reference trajectory.
struct TrajectorySpec {
  Position3 start{0.0, 0.0, 2.0};
  Vec3 direction{0.0, 0.0, -1.0};  // unit vector
  double speed = 0.1;              // mm per tick
  int num_ticks = 500;
  double dt = 0.02;                // s per tick

  // The realized per-tick increment: direction*speed snapped to the position
  // grid. All consumers of the trajectory must use this value.
  Vec3 per_tick_delta() const;

  double duration() const { return num_ticks * dt; }

  // Throws InvalidSpecError on non-unit direction (tolerance 1e-9),
  // non-positive speed/dt, or num_ticks < 1.
  void validate() const;
};

// Emits num_ticks+1 positions starting at the grid-snapped start; consecutive
// differences are all exactly per_tick_delta().
std::vector<Position3> make_constant_velocity_trajectory(
    const TrajectorySpec& spec);

}  // namespace pih
