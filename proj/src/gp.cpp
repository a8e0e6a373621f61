#include "pih/gp.hpp"

#include <cmath>
#include <iostream>

namespace pih {

namespace {

constexpr double kBaseJitter = 1e-8;

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const RbfKernelParams& p) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  const int d = static_cast<int>(A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      double q = 0.0;
      for (int f = 0; f < d; ++f) {
        const double r = (A(i, f) - B(j, f)) / p.lengthscale[f];
        q += r * r;
      }
      K(i, j) = p.signal_variance * std::exp(-0.5 * q);
    }
  }
  return K;
}

}  // namespace

void RbfKernelParams::validate(int n_features) const {
  if (static_cast<int>(lengthscale.size()) != n_features) {
    throw InvalidSpecError("lengthscale dimension mismatch");
  }
  for (double l : lengthscale) {
    if (!(l > 0.0)) throw InvalidSpecError("lengthscales must be > 0");
  }
  if (!(signal_variance > 0.0)) {
    throw InvalidSpecError("signal_variance must be > 0");
  }
  if (!(noise_variance > 0.0)) {
    throw InvalidSpecError("noise_variance must be > 0");
  }
}

void GpRegressor::factorize() {
  const Eigen::Index n = x_train_.rows();
  const Eigen::MatrixXd K = rbf_kernel(x_train_, x_train_, params_);
  double jitter = kBaseJitter;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += params_.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      chol_lower_ = llt.matrixL();
      alpha_ = llt.solve(y_);
      return;
    }
    jitter *= 100.0;
  }
  throw IllConditionedError("kernel matrix not positive definite after " +
                            std::to_string(n) + "-point jitter escalation");
}

GpRegressor GpRegressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const RbfKernelParams& params) {
  if (X.rows() < 1) throw InsufficientDataError("gp fit needs >= 1 sample");
  if (X.rows() != y.size()) {
    throw InvalidSpecError("feature/target row count mismatch");
  }
  params.validate(static_cast<int>(X.cols()));

  GpRegressor m;
  m.params_ = params;
  m.x_mean_ = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - m.x_mean_.transpose();
  if (X.rows() > 1) {
    m.x_std_ = (centered.array().square().colwise().sum() /
                static_cast<double>(X.rows() - 1))
                   .sqrt();
  } else {
    m.x_std_ = Eigen::VectorXd::Ones(X.cols());
  }
  for (Eigen::Index f = 0; f < m.x_std_.size(); ++f) {
    if (!(m.x_std_(f) > 0.0)) m.x_std_(f) = 1.0;  // constant feature
  }
  m.x_train_ = centered.array().rowwise() / m.x_std_.transpose().array();
  m.y_ = y;
  m.factorize();
  return m;
}

GpPrediction GpRegressor::predict(const Eigen::VectorXd& x_raw) const {
  if (x_raw.size() != x_train_.cols()) {
    throw InvalidSpecError("feature dimension mismatch in gp predict");
  }
  Eigen::VectorXd x =
      (x_raw - x_mean_).array() / x_std_.array();
  Eigen::VectorXd k_star(x_train_.rows());
  for (Eigen::Index i = 0; i < x_train_.rows(); ++i) {
    double q = 0.0;
    for (Eigen::Index f = 0; f < x_train_.cols(); ++f) {
      const double r = (x_train_(i, f) - x(f)) / params_.lengthscale[f];
      q += r * r;
    }
    k_star(i) = params_.signal_variance * std::exp(-0.5 * q);
  }

  GpPrediction pred;
  pred.mean = k_star.dot(alpha_);
  const Eigen::VectorXd v =
      chol_lower_.triangularView<Eigen::Lower>().solve(k_star);
  double var = params_.signal_variance - v.squaredNorm();
  if (var < 0.0) {
    if (var < -1e-9) {
      std::cerr << "gp: clamping negative posterior variance " << var << "\n";
    }
    var = 0.0;
  }
  pred.variance = var;
  return pred;
}

nlohmann::json GpRegressor::to_json() const {
  nlohmann::json j;
  j["lengthscale"] = params_.lengthscale;
  j["signal_variance"] = params_.signal_variance;
  j["noise_variance"] = params_.noise_variance;
  j["x_mean"] = std::vector<double>(x_mean_.data(), x_mean_.data() + x_mean_.size());
  j["x_std"] = std::vector<double>(x_std_.data(), x_std_.data() + x_std_.size());
  std::vector<std::vector<double>> rows(
      static_cast<std::size_t>(x_train_.rows()),
      std::vector<double>(static_cast<std::size_t>(x_train_.cols())));
  for (Eigen::Index i = 0; i < x_train_.rows(); ++i) {
    for (Eigen::Index f = 0; f < x_train_.cols(); ++f) {
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)] =
          x_train_(i, f);
    }
  }
  j["x_train"] = rows;
  j["y"] = std::vector<double>(y_.data(), y_.data() + y_.size());
  j["alpha"] = std::vector<double>(alpha_.data(), alpha_.data() + alpha_.size());
  return j;
}

GpRegressor GpRegressor::from_json(const nlohmann::json& j) {
  GpRegressor m;
  m.params_.lengthscale = j.at("lengthscale").get<std::vector<double>>();
  m.params_.signal_variance = j.at("signal_variance").get<double>();
  m.params_.noise_variance = j.at("noise_variance").get<double>();
  const auto x_mean = j.at("x_mean").get<std::vector<double>>();
  const auto x_std = j.at("x_std").get<std::vector<double>>();
  const auto rows = j.at("x_train").get<std::vector<std::vector<double>>>();
  const auto y = j.at("y").get<std::vector<double>>();
  const auto alpha = j.at("alpha").get<std::vector<double>>();
  if (rows.empty() || rows.size() != y.size() || y.size() != alpha.size()) {
    throw ConfigError("inconsistent gp model file");
  }
  const std::size_t d = rows.front().size();
  if (x_mean.size() != d || x_std.size() != d) {
    throw ConfigError("inconsistent gp model file");
  }
  m.x_mean_ = Eigen::Map<const Eigen::VectorXd>(x_mean.data(),
                                                static_cast<Eigen::Index>(d));
  m.x_std_ = Eigen::Map<const Eigen::VectorXd>(x_std.data(),
                                               static_cast<Eigen::Index>(d));
  m.x_train_.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw ConfigError("ragged gp training matrix");
    for (std::size_t f = 0; f < d; ++f) {
      m.x_train_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
          rows[i][f];
    }
  }
  m.y_ = Eigen::Map<const Eigen::VectorXd>(y.data(),
                                           static_cast<Eigen::Index>(y.size()));
  m.params_.validate(static_cast<int>(d));
  m.factorize();
  const Eigen::VectorXd stored = Eigen::Map<const Eigen::VectorXd>(
      alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  const double diff = (stored - m.alpha_).cwiseAbs().maxCoeff();
  if (diff > 1e-8) {
    throw ConfigError("stored gp weights disagree with recomputed ones (" +
                      std::to_string(diff) + ")");
  }
  return m;
}

GpRegressor gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const RbfKernelParams& params) {
  return GpRegressor::fit(X, y, params);
}

GpPrediction gp_predict(const GpRegressor& model, const Eigen::VectorXd& x) {
  return model.predict(x);
}

}  // namespace pih
