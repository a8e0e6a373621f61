#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "pih/accommodation.hpp"
#include "pih/rng.hpp"

using namespace pih;

namespace {

EnvConfig quiet_env() {
  EnvConfig cfg;
  cfg.noise_sigma = 0.0;
  return cfg;
}

TrajectorySpec descend(double speed = 0.1, int ticks = 500) {
  TrajectorySpec t;
  t.start = {0, 0, 2.0};
  t.direction = {0, 0, -1};
  t.speed = speed;
  t.num_ticks = ticks;
  return t;
}

// Discounted sum of Eq-1 evaluated the slow way over the full history.
double explicit_discounted_sum(const std::vector<double>& forces, double ka,
                               double gamma) {
  const std::size_t k = forces.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += std::pow(gamma, static_cast<double>(k - i)) * ka * forces[i];
  }
  return sum;
}

}  // namespace

TEST_CASE("linear controller is transparent in free space") {
  LinearAccommodationConfig cfg;
  LinearState state;
  state.x_c_prev = {0, 0, 2.0};
  const Vec3 delta{0, 0, -0.1};
  for (int k = 1; k <= 50; ++k) {
    const Position3 x_c = linear_command(state, delta, Wrench{}, cfg);
    CHECK(x_c.z == doctest::Approx(2.0 - 0.1 * k).epsilon(1e-12));
    CHECK(state.e[2] == 0.0);
  }
}

TEST_CASE("one tick of the feedback recursion, by hand") {
  LinearAccommodationConfig cfg;
  cfg.gamma = 0.5;
  cfg.ka = {0.1, 0.1, 0.1};
  LinearState state;
  state.x_c_prev = {0, 0, 0};
  Wrench f;
  f.fz = 2.0;
  const Vec3 delta{0, 0, -0.05};
  const Position3 x_c = linear_command(state, delta, f, cfg);
  CHECK(state.e[2] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(x_c.z == doctest::Approx(-0.05 + 0.1).epsilon(1e-15));
}

TEST_CASE("recursion equals the explicit discounted sum") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double gamma = rng.uniform(0.05, 0.95);
    const double ka = rng.uniform(0.001, 0.2);
    LinearAccommodationConfig cfg;
    cfg.gamma = gamma;
    cfg.ka = {ka, ka, ka};
    LinearState state;
    std::vector<double> history;
    const int len = 1 + static_cast<int>(rng.next_u64() % 200);
    for (int k = 0; k < len; ++k) {
      Wrench f;
      f.fz = rng.uniform(-5.0, 5.0);
      history.push_back(f.fz);
      linear_command(state, {0, 0, -0.1}, f, cfg);
      const double expected = explicit_discounted_sum(history, ka, gamma);
      CHECK(std::abs(state.e[2] - expected) < 1e-10);
    }
  }
}

TEST_CASE("steady-state force closed form") {
  CHECK(steady_state_force_linear(0.1, 0.01, 0.35) ==
        doctest::Approx(-18.571428571428573).epsilon(1e-12));
  CHECK(std::abs(steady_state_force_linear(0.1, 0.01, 0.35)) ==
        doctest::Approx(18.57).epsilon(1e-3));
  CHECK(steady_state_force_linear(0.0, 0.01, 0.35) == 0.0);
  // gamma -> 1 drives the magnitude to zero
  CHECK(std::abs(steady_state_force_linear(0.1, 0.01, 1.0 - 1e-9)) < 1e-6);
  CHECK_THROWS_AS(steady_state_force_linear(0.1, 0.0, 0.35), InvalidSpecError);
}

TEST_CASE("holding the fixed-point force freezes the command") {
  LinearAccommodationConfig cfg;
  cfg.gamma = 0.35;
  cfg.ka = {0.02, 0.02, 0.02};
  const Vec3 delta{0, 0, -0.1};
  const double f_star = steady_state_force_linear(delta.z, cfg.ka[2], cfg.gamma);
  LinearState state;
  state.x_c_prev = {0, 0, 0};
  Wrench f;
  f.fz = f_star;
  double prev_z = 0.0;
  double increment = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 500; ++k) {
    const Position3 x_c = linear_command(state, delta, f, cfg);
    increment = std::abs(x_c.z - prev_z);
    prev_z = x_c.z;
  }
  CHECK(increment < 1e-9);
}

TEST_CASE("sigmoid gate hits its analytic landmarks") {
  const double ka = 2.0, f_sat = 5.0;
  CHECK(sigmoid_alpha(f_sat, ka, f_sat) == 0.5);
  CHECK(sigmoid_alpha(f_sat + std::log(3.0) / ka, ka, f_sat) ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK(sigmoid_alpha(f_sat + 40.0 / ka, ka, f_sat) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigmoid_alpha(0.0, ka, f_sat) < 1e-4);
}

TEST_CASE("nonlinear controller barely attenuates free-space motion") {
  NonlinearAccommodationConfig cfg;
  cfg.ka = 4.0;
  cfg.f_sat = 5.0;  // ka*f_sat = 20 >= 10
  const Vec3 delta{0, 0, -0.1};
  const Position3 x_c = nonlinear_command({0, 0, 2.0}, delta, Wrench{}, cfg);
  const double advance_factor = (2.0 - x_c.z) / 0.1;
  CHECK(advance_factor >= 0.999);
}

TEST_CASE("nonlinear advance halves at the saturation force") {
  NonlinearAccommodationConfig cfg;
  cfg.ka = 2.0;
  cfg.f_sat = 5.0;
  Wrench f;
  f.fz = cfg.f_sat;
  const Position3 x_c = nonlinear_command({0, 0, 2.0}, {0, 0, -0.1}, f, cfg);
  CHECK(2.0 - x_c.z == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("nonlinear advance shrinks to 1% at the alpha=0.99 force") {
  NonlinearAccommodationConfig cfg;
  cfg.ka = 2.0;
  cfg.f_sat = 5.0;
  Wrench f;
  f.fz = cfg.f_sat + std::log(99.0) / cfg.ka;
  const Position3 x_c = nonlinear_command({0, 0, 2.0}, {0, 0, -0.1}, f, cfg);
  CHECK(2.0 - x_c.z == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("non-finite forces raise a sensor fault") {
  LinearAccommodationConfig lin;
  LinearState state;
  Wrench f;
  f.fz = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(linear_command(state, {0, 0, -0.1}, f, lin),
                  SensorFaultError);
  NonlinearAccommodationConfig nl;
  f.fz = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(nonlinear_command({0, 0, 0}, {0, 0, -0.1}, f, nl),
                  SensorFaultError);
}

TEST_CASE("zero misalignment: the peg just goes in") {
  const EnvConfig env = quiet_env();
  for (const ControllerConfig& ctl :
       {ControllerConfig{LinearAccommodationConfig{}},
        ControllerConfig{NonlinearAccommodationConfig{}}}) {
    const EpisodeLog log = run_episode(ctl, env, descend(), {0.0, 0.0});
    REQUIRE_FALSE(log.meta.aborted);
    double max_lateral = 0.0;
    double max_fz = 0.0;
    for (const auto& r : log.records) {
      max_lateral = std::max({max_lateral, std::abs(r.wrench.fx),
                              std::abs(r.wrench.fy)});
      max_fz = std::max(max_fz, std::abs(r.wrench.fz));
    }
    CHECK(max_lateral == 0.0);
    CHECK(max_fz == 0.0);
    CHECK(log.records.back().x.z < env.surface_z);
  }
}

TEST_CASE("blocked linear episode settles at the analytic force") {
  const EnvConfig env = quiet_env();
  LinearAccommodationConfig lin;
  const TrajectorySpec traj = descend();
  const EpisodeLog log = run_episode(lin, env, traj, {2.0, 0.0});
  const double expected =
      std::abs(steady_state_force_linear(traj.per_tick_delta().z, lin.ka[2],
                                         lin.gamma));
  const double final_fz = log.records.back().wrench.fz;
  CHECK(std::abs(final_fz - expected) / expected < 0.05);
}

TEST_CASE("both controllers satisfy the force-settling contract") {
  const EnvConfig env = quiet_env();
  const TrajectorySpec traj = descend(0.1, 800);
  for (const ControllerConfig& ctl :
       {ControllerConfig{LinearAccommodationConfig{}},
        ControllerConfig{NonlinearAccommodationConfig{}}}) {
    const EpisodeLog log = run_episode(ctl, env, traj, {1.5, 0.0});
    REQUIRE_FALSE(log.meta.aborted);
    // after some K, consecutive force differences stay under 0.01 N
    std::size_t last_violation = 0;
    for (std::size_t k = 1; k < log.records.size(); ++k) {
      const Wrench diff = log.records[k].wrench - log.records[k - 1].wrench;
      if (diff.force_norm() > 0.01) last_violation = k;
    }
    CHECK(last_violation + 1 < log.records.size());
  }
}

TEST_CASE("bounded forces under both laws") {
  const EnvConfig env = quiet_env();
  const TrajectorySpec traj = descend(0.1, 800);

  LinearAccommodationConfig lin;
  const EpisodeLog lin_log = run_episode(lin, env, traj, {2.0, 0.0});
  const double f_star = std::abs(
      steady_state_force_linear(traj.per_tick_delta().z, lin.ka[2], lin.gamma));
  NonlinearAccommodationConfig nl;
  const EpisodeLog nl_log = run_episode(nl, env, traj, {2.0, 0.0});
  double lin_max = 0.0, nl_max = 0.0;
  for (const auto& r : lin_log.records) lin_max = std::max(lin_max, r.wrench.fz);
  for (const auto& r : nl_log.records) nl_max = std::max(nl_max, r.wrench.fz);
  CHECK(lin_max <= 1.5 * f_star);
  CHECK(nl_max <= nl.f_sat + 10.0 / nl.ka);
}

TEST_CASE("non-finite observations abort the episode with an annotation") {
  EnvConfig env = quiet_env();
  const double inf = std::numeric_limits<double>::infinity();
  env.stiffness = {inf, inf, inf};  // degenerate rig: wrench goes NaN
  const EpisodeLog log =
      run_episode(LinearAccommodationConfig{}, env, descend(), {2.0, 0.0});
  CHECK(log.meta.aborted);
  CHECK_FALSE(log.meta.abort_reason.empty());
  CHECK(log.records.size() < 502);
}

TEST_CASE("episode csv round-trips through the fixed schema") {
  const EnvConfig env = quiet_env();
  const EpisodeLog log =
      run_episode(LinearAccommodationConfig{}, env, descend(0.1, 120), {1.0, 0.5});
  const std::string path = "episode_roundtrip_test.csv";
  log.save_csv(path);
  const auto records = EpisodeLog::load_csv(path);
  REQUIRE(records.size() == log.records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].t == log.records[i].t);
    CHECK(std::abs(records[i].x.z - log.records[i].x.z) < 1e-9);
    CHECK(records[i].wrench.fz == log.records[i].wrench.fz);
    CHECK(records[i].wrench.my == log.records[i].wrench.my);
  }
  std::remove(path.c_str());
}

TEST_CASE("episodes are reproducible from the seed") {
  EnvConfig env;
  env.noise_sigma = 0.05;
  env.seed = 123;
  const EpisodeLog a =
      run_episode(LinearAccommodationConfig{}, env, descend(0.1, 200), {1.0, -2.0});
  const EpisodeLog b =
      run_episode(LinearAccommodationConfig{}, env, descend(0.1, 200), {1.0, -2.0});
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].wrench.fz == b.records[i].wrench.fz);
    CHECK(a.records[i].x.x == b.records[i].x.x);
  }
}
