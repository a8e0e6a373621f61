// Exact Gaussian-process regression with an anisotropic RBF kernel.
//
// Training features are standardized internally (the transform is stored
// with the model). Fitting factorizes K + (noise + jitter)*I by Cholesky,
// escalating the jitter a few times before giving up. Models persist to JSON
// with the alpha weights; loading recomputes the factorization and verifies
// the stored weights.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pih/core.hpp"

namespace pih {

struct RbfKernelParams {
  std::vector<double> lengthscale;  // per standardized feature
  double signal_variance = 1.0;
  double noise_variance = 0.01;

  void validate(int n_features) const;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;  // latent posterior variance, clamped at 0
};

class GpRegressor {
 public:
  GpRegressor() = default;  // empty shell; fill via fit or from_json

  // X is n x d raw (unstandardized) features, y the targets. Requires at
  // least one sample. Throws IllConditionedError when the kernel matrix
  // stays indefinite after jitter escalation.
  static GpRegressor fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const RbfKernelParams& params);

  GpPrediction predict(const Eigen::VectorXd& x_raw) const;

  int n_features() const { return static_cast<int>(x_train_.cols()); }
  int n_samples() const { return static_cast<int>(x_train_.rows()); }
  const RbfKernelParams& params() const { return params_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  nlohmann::json to_json() const;
  // Recomputes the Cholesky factor from the stored training set and verifies
  // the recomputed weights against the stored ones (max abs diff <= 1e-8);
  // throws ConfigError on mismatch.
  static GpRegressor from_json(const nlohmann::json& j);

 private:
  void factorize();  // fills chol_ and alpha_ from x_train_/y_/params_

  RbfKernelParams params_;
  Eigen::MatrixXd x_train_;  // standardized
  Eigen::VectorXd y_;
  Eigen::VectorXd x_mean_;
  Eigen::VectorXd x_std_;
  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd alpha_;
};

// Convenience wrappers matching the operation names used elsewhere.
GpRegressor gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const RbfKernelParams& params);
GpPrediction gp_predict(const GpRegressor& model, const Eigen::VectorXd& x);

}  // namespace pih
