#include "pih/insertion.hpp"

#include <cmath>

#include "pih/rng.hpp"

namespace pih {

void PolicyConfig::validate() const {
  if (!(step_size > 0.0)) throw InvalidSpecError("step_size must be > 0");
  if (!(divergence_limit > step_size)) {
    throw InvalidSpecError("divergence_limit must exceed step_size");
  }
  if (max_corrections < 0) {
    throw InvalidSpecError("max_corrections must be >= 0");
  }
  if (!(success_depth > 0.0)) {
    throw InvalidSpecError("success_depth must be > 0");
  }
}

HoleEstimate simulate_hole_estimate(double true_x, double true_y, Rng& rng,
                                    double error_bound) {
  HoleEstimate est;
  est.x = true_x + rng.uniform(-error_bound, error_bound);
  est.y = true_y + rng.uniform(-error_bound, error_bound);
  est.error_bound = error_bound;
  return est;
}

GpDirectionPredictor::GpDirectionPredictor(DirectionClassifier x,
                                           DirectionClassifier y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.axis() != 0 || y_.axis() != 1) {
    throw ConfigError("direction classifiers bound to the wrong axes");
  }
}

AxisDecision GpDirectionPredictor::decide(const PredictionContext& ctx,
                                          int axis) const {
  const DirectionClassifier& c = axis == 0 ? x_ : y_;
  const double value = c.decision_value(ctx.steady_features);
  return {value >= 0.0 ? 1 : -1, std::abs(value)};
}

AxisDecision PerfectDirectionPredictor::decide(const PredictionContext& ctx,
                                               int axis) const {
  const double d = axis == 0 ? ctx.true_offset.dx : ctx.true_offset.dy;
  if (std::abs(d) < 1e-9) return {1, 0.0};  // aligned: gate off
  return {d > 0.0 ? 1 : -1, 1.0};
}

AxisDecision AdversarialDirectionPredictor::decide(
    const PredictionContext& ctx, int axis) const {
  const double d = axis == 0 ? ctx.true_offset.dx : ctx.true_offset.dy;
  return {d >= 0.0 ? -1 : 1, 1.0};
}

namespace {

struct WindowAccumulator {
  // Wrenches observed since the current contact phase began.
  std::vector<Wrench> buffer;

  void reset() { buffer.clear(); }
  void push(const Wrench& w) { buffer.push_back(w); }

  std::vector<double> fz() const {
    std::vector<double> out;
    out.reserve(buffer.size());
    for (const auto& w : buffer) out.push_back(w.fz);
    return out;
  }

  Wrench window_mean(std::size_t window, std::size_t ticks_per_window) const {
    Wrench mean;
    const std::size_t begin = window * ticks_per_window;
    for (std::size_t i = begin; i < begin + ticks_per_window; ++i) {
      const Wrench& w = buffer[i];
      mean.fx += w.fx;
      mean.fy += w.fy;
      mean.fz += w.fz;
      mean.mx += w.mx;
      mean.my += w.my;
      mean.mz += w.mz;
    }
    const double n = static_cast<double>(ticks_per_window);
    mean.fx /= n;
    mean.fy /= n;
    mean.fz /= n;
    mean.mx /= n;
    mean.my /= n;
    mean.mz /= n;
    return mean;
  }
};

}  // namespace

TrialResult attempt_insertion(const SimSetup& setup,
                              const DirectionPredictor& predictor,
                              const PolicyConfig& policy,
                              const HoleEstimate& estimate) {
  policy.validate();
  setup.trajectory.validate();
  setup.convergence.validate();
  const Vec3 delta = setup.trajectory.per_tick_delta();
  if (!(delta.z < 0.0)) {
    throw InvalidSpecError("insertion trajectory must advance downward");
  }

  ContactEnv env(setup.env);
  const bool is_linear = controller_kind(setup.controller) ==
                         ControllerKind::linear;

  Position3 x_c{estimate.x, estimate.y, setup.trajectory.start.z};
  LinearState lin_state;
  lin_state.x_c_prev = x_c;

  auto [state, wrench] = env.step(x_c);

  const auto ticks_per_window = static_cast<std::size_t>(
      std::llround(setup.convergence.window_len / setup.trajectory.dt));
  WindowAccumulator acc;

  TrialResult result;
  const long budget = static_cast<long>(policy.max_corrections + 2) *
                      static_cast<long>(setup.trajectory.num_ticks);

  for (long tick = 1; tick <= budget; ++tick) {
    try {
      if (is_linear) {
        x_c = linear_command(
            lin_state, delta, wrench,
            std::get<LinearAccommodationConfig>(setup.controller));
      } else {
        x_c = nonlinear_command(
            x_c, delta, wrench,
            std::get<NonlinearAccommodationConfig>(setup.controller));
      }
    } catch (const SensorFaultError& err) {
      result.aborted = true;
      result.abort_reason = err.what();
      break;
    }
    std::tie(state, wrench) = env.step(x_c);

    if (state.in_hole) {
      acc.reset();  // free descent, no contact to analyze
      if (state.peg.z <= setup.env.surface_z - policy.success_depth) {
        result.success = true;
        break;
      }
      continue;
    }
    if (state.contact_depth <= 0.0) continue;  // still approaching

    acc.push(wrench);
    if (acc.buffer.size() % ticks_per_window != 0) continue;
    const auto fz = acc.fz();
    const auto detected =
        detect_convergence_online(fz, setup.trajectory.dt, setup.convergence);
    if (!detected) continue;

    // Quasi-steady contact with the peg still blocked: one correction
    // attempt.
    if (result.corrections_used >= policy.max_corrections) break;

    PredictionContext ctx;
    ctx.steady_features = acc.window_mean(*detected, ticks_per_window);
    ctx.true_offset = {x_c.x - setup.env.hole_center_x,
                       x_c.y - setup.env.hole_center_y};
    const AxisDecision dec_x = predictor.decide(ctx, 0);
    const AxisDecision dec_y = predictor.decide(ctx, 1);

    CorrectionRecord rec;
    rec.steady_features = ctx.steady_features;
    rec.decision_x = dec_x.confidence * dec_x.sign;
    rec.decision_y = dec_y.confidence * dec_y.sign;

    double step_x = 0.0, step_y = 0.0;
    if (dec_x.confidence > policy.decision_gate) {
      step_x = -policy.step_size * dec_x.sign;
      rec.step_sign_x = dec_x.sign > 0 ? -1 : 1;
    }
    if (dec_y.confidence > policy.decision_gate) {
      step_y = -policy.step_size * dec_y.sign;
      rec.step_sign_y = dec_y.sign > 0 ? -1 : 1;
    }

    ++result.corrections_used;
    result.corrections.push_back(rec);

    if (step_x != 0.0 || step_y != 0.0) {
      const double cand_x = x_c.x + step_x;
      const double cand_y = x_c.y + step_y;
      // Never command a lateral position outside the allowed neighborhood of
      // the initial estimate.
      if (std::hypot(cand_x - estimate.x, cand_y - estimate.y) >
          policy.divergence_limit) {
        break;
      }
      x_c.x = cand_x;
      x_c.y = cand_y;
      lin_state.x_c_prev = x_c;  // the side-step is a reference displacement
    }
    acc.reset();  // new contact formation
  }

  result.final_offset = std::hypot(state.peg.x - setup.env.hole_center_x,
                                   state.peg.y - setup.env.hole_center_y);
  return result;
}

RunSummary evaluate_policy(const SimSetup& setup,
                           const DirectionPredictor& predictor,
                           const PolicyConfig& policy, int n_trials,
                           std::uint64_t seed) {
  if (n_trials < 1) throw InvalidSpecError("n_trials must be >= 1");
  RunSummary summary;
  summary.n_trials = n_trials;
  long corrections_over_successes = 0;

  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t trial_seed =
        mix_seed(seed, static_cast<std::uint64_t>(t));
    Rng est_rng(mix_seed(trial_seed, 0xE57));
    const HoleEstimate estimate = simulate_hole_estimate(
        setup.env.hole_center_x, setup.env.hole_center_y, est_rng);

    SimSetup trial_setup = setup;
    trial_setup.env.seed = mix_seed(trial_seed, 0x31);
    TrialResult trial =
        attempt_insertion(trial_setup, predictor, policy, estimate);
    if (trial.success) {
      ++summary.n_successes;
      corrections_over_successes += trial.corrections_used;
    }
    summary.trials.push_back(std::move(trial));
  }

  summary.success_rate = static_cast<double>(summary.n_successes) /
                         static_cast<double>(n_trials);
  summary.mean_corrections =
      summary.n_successes > 0
          ? static_cast<double>(corrections_over_successes) /
                static_cast<double>(summary.n_successes)
          : 0.0;
  return summary;
}

nlohmann::json RunSummary::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : trials) {
    arr.push_back({{"success", t.success},
                   {"corrections_used", t.corrections_used},
                   {"final_offset", t.final_offset},
                   {"aborted", t.aborted}});
  }
  return nlohmann::json{{"n_trials", n_trials},
                        {"success_rate", success_rate},
                        {"mean_corrections", mean_corrections},
                        {"trials", arr}};
}

}  // namespace pih
