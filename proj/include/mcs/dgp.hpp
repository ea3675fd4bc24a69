#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/rng.hpp"

namespace mcs {

// Synthetic data-generating processes used by the simulation studies.
// Gaussian parameters written N(0, v) are variances throughout.

inline constexpr double kMarsNoiseVariance = 10.0;

// Conditional mean of the MARS response at one feature row.
inline double mars_mean(const Eigen::Ref<const Eigen::RowVectorXd>& x, double gamma) {
  const double pi = std::numbers::pi;
  return 10.0 * gamma * std::sin(pi * x(0) * x(1)) + 20.0 * gamma * (x(2) - 0.05) * (x(2) - 0.05) +
         10.0 * x(3) + 5.0 * x(4);
}

// Y = 10g sin(pi X1 X2) + 20g (X3 - 0.05)^2 + 10 X4 + 5 X5 + eps, X ~ U[0,1]^5.
inline Dataset gen_mars(Index n, double gamma, const RngSeed& seed) {
  if (n < 1) throw ConfigError("gen_mars needs n >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gen_mars needs gamma >= 0");
  Rng rng(seed);
  Eigen::MatrixXd x(n, 5);
  Eigen::VectorXd y(n);
  const double noise_sd = std::sqrt(kMarsNoiseVariance);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 5; ++j) x(i, j) = rng.uniform();
    y(i) = mars_mean(x.row(i), gamma) + noise_sd * rng.normal();
  }
  return Dataset(std::move(x), std::move(y), Task::regression, {"x1", "x2", "x3", "x4", "x5"});
}

inline constexpr Index kFeatureSelectionDim = 6;

inline Eigen::MatrixXd toeplitz_covariance(Index p, double rho) {
  Eigen::MatrixXd sigma(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return sigma;
}

inline Eigen::VectorXd feature_selection_beta() {
  Eigen::VectorXd beta(kFeatureSelectionDim);
  beta << 1, 0, 1, 0, 1, 0;
  return beta;
}

// sigma^2 = beta' Sigma beta / nu.
inline double feature_selection_noise_variance(double nu, double rho) {
  const Eigen::VectorXd beta = feature_selection_beta();
  return beta.dot(toeplitz_covariance(kFeatureSelectionDim, rho) * beta) / nu;
}

// X ~ N(0, Sigma) with Sigma_ij = rho^|i-j|, Y = X1 + X3 + X5 + eps.
inline Dataset gen_feature_selection(Index n, double nu, double rho, const RngSeed& seed) {
  if (n < 1) throw ConfigError("gen_feature_selection needs n >= 1");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("gen_feature_selection needs nu > 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("gen_feature_selection needs rho in [0,1)");
  const Index p = kFeatureSelectionDim;
  const Eigen::MatrixXd chol = toeplitz_covariance(p, rho).llt().matrixL();
  const Eigen::VectorXd beta = feature_selection_beta();
  const double noise_sd = std::sqrt(feature_selection_noise_variance(nu, rho));
  Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  Eigen::VectorXd z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(j) = rng.normal();
    const Eigen::VectorXd xi = chol * z;
    x.row(i) = xi.transpose();
    y(i) = beta.dot(xi) + noise_sd * rng.normal();
  }
  return Dataset(std::move(x), std::move(y), Task::regression,
                 {"x1", "x2", "x3", "x4", "x5", "x6"});
}

// How the sample-variance scale enters regression noise injection.
enum class NoiseScale {
  variance,  // eps ~ N(0, s2): s2 used as the variance
  stddev,    // eps sd equals s2
};

inline double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

// Classification: flip each label with probability rho.
// Regression: y + 4 rho eps with eps ~ N(0, s2), s2 the sample variance of y.
inline Dataset inject_noise(const Dataset& data, double rho, const RngSeed& seed,
                            NoiseScale scale = NoiseScale::variance) {
  if (!(rho >= 0.0 && rho <= 0.25)) {
    throw ConfigError("noise level rho must lie in [0, 0.25], got " + std::to_string(rho));
  }
  if (rho == 0.0) return data;
  Rng rng(seed);
  Eigen::VectorXd y = data.target();
  if (data.task() == Task::classification) {
    for (Index i = 0; i < y.size(); ++i) {
      if (rng.bernoulli(rho)) y(i) = 1.0 - y(i);
    }
  } else {
    const double s2 = sample_variance(y);
    const double sd = scale == NoiseScale::variance ? std::sqrt(s2) : s2;
    for (Index i = 0; i < y.size(); ++i) y(i) += 4.0 * rho * sd * rng.normal();
  }
  return data.with_target(std::move(y));
}

// Y ~ Bernoulli(p) with one irrelevant uniform feature. Used to build null
// settings where two constant predictors 0 and 1 give loss differences in
// {-1, +1} under squared error.
inline Dataset gen_bernoulli_null(Index n, double p, const RngSeed& seed) {
  if (n < 1) throw ConfigError("gen_bernoulli_null needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gen_bernoulli_null needs p in [0,1]");
  Rng rng(seed);
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    y(i) = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  return Dataset(std::move(x), std::move(y), Task::regression, {"u"});
}

}  // namespace mcs
