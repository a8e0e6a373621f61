#include "pih/core.hpp"

namespace pih {

double snap_to_position_grid(double v) {
  return std::ldexp(std::round(std::ldexp(v, 26)), -26);
}

Vec3 snap_to_position_grid(const Vec3& v) {
  return {snap_to_position_grid(v.x), snap_to_position_grid(v.y),
          snap_to_position_grid(v.z)};
}

Vec3 TrajectorySpec::per_tick_delta() const {
  return snap_to_position_grid(speed * direction);
}

void TrajectorySpec::validate() const {
  if (!start.finite() || !direction.finite()) {
    throw InvalidSpecError("trajectory spec has non-finite components");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw InvalidSpecError("trajectory direction must be a unit vector");
  }
  if (!(speed > 0.0)) {
    throw InvalidSpecError("trajectory speed must be positive");
  }
  if (num_ticks < 1) {
    throw InvalidSpecError("trajectory needs at least one tick");
  }
  if (!(dt > 0.0)) {
    throw InvalidSpecError("trajectory dt must be positive");
  }
}

std::vector<Position3> make_constant_velocity_trajectory(
    const TrajectorySpec& spec) {
  spec.validate();
  const Vec3 delta = spec.per_tick_delta();
  std::vector<Position3> points;
  points.reserve(static_cast<std::size_t>(spec.num_ticks) + 1);
  Position3 p = snap_to_position_grid(spec.start);
  points.push_back(p);
  for (int k = 0; k < spec.num_ticks; ++k) {
    p = p + delta;  // exact: both operands are grid-aligned
    points.push_back(p);
  }
  return points;
}

}  // namespace pih
