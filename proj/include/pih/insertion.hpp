// Closed-loop corrective insertion policy and its evaluation harness.
//
// A trial descends onto the estimated hole location with an accommodation
// controller, waits for the contact wrench to go quasi-steady, asks the
// direction models which way the peg is off, and side-steps a fixed unit
// distance per confident axis. The loop ends on insertion to depth, on the
// correction cap, or when the commanded lateral position would leave the
// allowed neighborhood of the initial estimate.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pih/convergence.hpp"
#include "pih/core.hpp"
#include "pih/learning.hpp"

namespace pih {

struct PolicyConfig {
  double step_size = 0.5;        // mm per corrective step
  int max_corrections = 10;
  double divergence_limit = 5.0;  // mm from the initial estimate
  double success_depth = 5.0;     // mm below the surface
  double decision_gate = 0.1;     // min |decision value| to step an axis

  void validate() const;
};

struct HoleEstimate {
  double x = 0.0;
  double y = 0.0;
  double error_bound = 3.0;  // per-axis, mm
};

// Vision surrogate: the estimate is the true center plus independent
// uniform(-bound, bound) error per axis.
HoleEstimate simulate_hole_estimate(double true_x, double true_y, Rng& rng,
                                    double error_bound = 3.0);

// What the predictor sees at decision time. The true offset is available only
// to test stubs; the learned predictor must ignore it.
struct PredictionContext {
  Wrench steady_features;
  PlanarMisalignment true_offset;
};

struct AxisDecision {
  int sign = 0;             // predicted sign of the offset along the axis
  double confidence = 0.0;  // gate input; axis steps when >= gate
};

class DirectionPredictor {
 public:
  virtual ~DirectionPredictor() = default;
  virtual AxisDecision decide(const PredictionContext& ctx, int axis) const = 0;
};

// Learned predictor backed by the per-axis direction classifiers.
class GpDirectionPredictor : public DirectionPredictor {
 public:
  GpDirectionPredictor(DirectionClassifier x, DirectionClassifier y);
  AxisDecision decide(const PredictionContext& ctx, int axis) const override;

 private:
  DirectionClassifier x_;
  DirectionClassifier y_;
};

// Test stub with oracle access to the true offset.
class PerfectDirectionPredictor : public DirectionPredictor {
 public:
  AxisDecision decide(const PredictionContext& ctx, int axis) const override;
};

// Test stub that always predicts the wrong way.
class AdversarialDirectionPredictor : public DirectionPredictor {
 public:
  AxisDecision decide(const PredictionContext& ctx, int axis) const override;
};

struct CorrectionRecord {
  int step_sign_x = 0;  // sign of the commanded step, 0 when gated off
  int step_sign_y = 0;
  double decision_x = 0.0;
  double decision_y = 0.0;
  Wrench steady_features;
};

struct TrialResult {
  bool success = false;
  int corrections_used = 0;
  double final_offset = 0.0;  // lateral distance to the true center, mm
  std::vector<CorrectionRecord> corrections;
  bool aborted = false;
  std::string abort_reason;
};

struct RunSummary {
  int n_trials = 0;
  int n_successes = 0;
  double success_rate = 0.0;
  double mean_corrections = 0.0;  // over successful trials
  std::vector<TrialResult> trials;

  nlohmann::json to_json() const;
};

// One closed-loop insertion attempt starting above the estimated center.
// Throws ConfigError when called without a predictor.
TrialResult attempt_insertion(const SimSetup& setup,
                              const DirectionPredictor& predictor,
                              const PolicyConfig& policy,
                              const HoleEstimate& estimate);

// n independent trials, each with a fresh hole estimate and noise stream
// derived from the run seed.
RunSummary evaluate_policy(const SimSetup& setup,
                           const DirectionPredictor& predictor,
                           const PolicyConfig& policy, int n_trials,
                           std::uint64_t seed);

}  // namespace pih
