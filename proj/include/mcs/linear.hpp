#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/model.hpp"

namespace mcs {

namespace detail {

inline IndexList resolve_subset(const std::optional<IndexList>& subset, Index p) {
  IndexList cols;
  if (subset) {
    cols = *subset;
    for (auto c : cols) {
      if (c < 0 || c >= p) {
        throw ConfigError("feature index " + std::to_string(c) + " out of range for p=" +
                          std::to_string(p));
      }
    }
  } else {
    cols.resize(static_cast<std::size_t>(p));
    std::iota(cols.begin(), cols.end(), Index{0});
  }
  return cols;
}

// Selected columns, with a leading column of ones when `intercept` is set.
inline Eigen::MatrixXd design(const Eigen::MatrixXd& x, const IndexList& cols, bool intercept) {
  const Index off = intercept ? 1 : 0;
  Eigen::MatrixXd d(x.rows(), static_cast<Index>(cols.size()) + off);
  if (intercept) d.col(0).setOnes();
  for (std::size_t j = 0; j < cols.size(); ++j) d.col(static_cast<Index>(j) + off) = x.col(cols[j]);
  return d;
}

inline std::string subset_label(const IndexList& cols) {
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? " " : "") << cols[i];
  return os.str();
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

// x[:, features] * coef + intercept, optionally squashed through a sigmoid.
class LinearModel final : public ModelBase {
 public:
  LinearModel(IndexList features, Eigen::VectorXd coef, double intercept, bool logistic)
      : features_(std::move(features)), coef_(std::move(coef)), intercept_(intercept), logistic_(logistic) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(x.rows(), intercept_);
    for (std::size_t j = 0; j < features_.size(); ++j) {
      eta.noalias() += coef_(static_cast<Index>(j)) * x.col(features_[j]);
    }
    if (logistic_) eta = eta.unaryExpr([](double z) { return detail::sigmoid(z); });
    return eta;
  }

  std::string describe() const override {
    return std::string(logistic_ ? "logistic" : "ols") + "[" + detail::subset_label(features_) + "]";
  }

  const IndexList& features() const noexcept { return features_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
  double intercept() const noexcept { return intercept_; }

 private:
  IndexList features_;
  Eigen::VectorXd coef_;
  double intercept_;
  bool logistic_;
};

struct OlsOptions {
  bool intercept = true;
};

// Least squares by complete orthogonal decomposition, which returns the
// minimum-norm solution for rank-deficient designs.
inline Model fit_ols(const Dataset& train, const std::optional<IndexList>& subset = std::nullopt,
                     const OlsOptions& options = {}) {
  if (train.task() != Task::regression) throw ConfigError("OLS requires a regression dataset");
  const IndexList cols = detail::resolve_subset(subset, train.cols());
  const Index off = options.intercept ? 1 : 0;
  if (train.rows() < static_cast<Index>(cols.size()) + off) {
    throw DataError("OLS needs at least " + std::to_string(cols.size() + off) +
                    " training rows, got " + std::to_string(train.rows()));
  }
  if (cols.empty() && !options.intercept) {
    return Model::make<LinearModel>(cols, Eigen::VectorXd(), 0.0, false);
  }
  const Eigen::MatrixXd d = detail::design(train.features(), cols, options.intercept);
  const Eigen::VectorXd beta = d.completeOrthogonalDecomposition().solve(train.target());
  if (!beta.allFinite()) throw NumericError("OLS produced non-finite coefficients");
  const double intercept = options.intercept ? beta(0) : 0.0;
  Eigen::VectorXd coef = beta.tail(static_cast<Index>(cols.size()));
  return Model::make<LinearModel>(cols, std::move(coef), intercept, false);
}

struct LogisticOptions {
  double ridge = 1e-6;
  int max_iter = 100;
  double tol = 1e-8;
  bool intercept = true;
};

// Penalized maximum likelihood by IRLS (Newton steps with step halving).
// The ridge term applies to slopes only.
inline Model fit_logistic(const Dataset& train, const std::optional<IndexList>& subset = std::nullopt,
                          const LogisticOptions& options = {}) {
  if (train.task() != Task::classification) {
    throw ConfigError("logistic regression requires a classification dataset");
  }
  const Eigen::VectorXd& y = train.target();
  const double ones = y.sum();
  if (ones == 0.0 || ones == static_cast<double>(y.size())) {
    throw DataError("logistic regression needs both classes in the training rows");
  }
  const IndexList cols = detail::resolve_subset(subset, train.cols());
  const Eigen::MatrixXd d = detail::design(train.features(), cols, options.intercept);
  const Index q = d.cols();
  const Index off = options.intercept ? 1 : 0;

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(q, options.ridge);
  if (options.intercept) penalty(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = d * b;
    double ll = 0.0;
    for (Index i = 0; i < eta.size(); ++i) {
      // log(1 + exp(eta)) computed stably
      const double z = eta(i);
      const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      ll += y(i) * z - softplus;
    }
    return ll - 0.5 * (penalty.array() * b.array().square()).sum();
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  double current = objective(beta);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::VectorXd eta = d * beta;
    Eigen::VectorXd p(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
      p(i) = detail::sigmoid(eta(i));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-300);
    }
    const Eigen::VectorXd grad = d.transpose() * (y - p) - penalty.cwiseProduct(beta);
    Eigen::MatrixXd hess = d.transpose() * w.asDiagonal() * d;
    hess.diagonal() += penalty;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-300)) {
      hess.diagonal().array() += 1e-10;
      ldlt.compute(hess);
    }
    Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) break;

    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    double value = objective(next);
    for (int h = 0; h < 30 && !(value >= current); ++h) {
      scale *= 0.5;
      next = beta + scale * step;
      value = objective(next);
    }
    if (!(value >= current)) break;
    const double change = (scale * step).cwiseAbs().maxCoeff();
    beta = std::move(next);
    current = value;
    if (change < options.tol) break;
  }
  if (!beta.allFinite()) throw NumericError("logistic regression produced non-finite coefficients");
  const double intercept = options.intercept ? beta(0) : 0.0;
  Eigen::VectorXd coef = beta.tail(q - off);
  return Model::make<LinearModel>(cols, std::move(coef), intercept, true);
}

inline FitAlgorithm ols_algorithm(std::optional<IndexList> subset = std::nullopt, OlsOptions options = {}) {
  ParamRecord params{{"intercept", options.intercept ? "true" : "false"}};
  if (subset) params["features"] = detail::subset_label(*subset);
  return FitAlgorithm("ols", std::move(params),
                      [subset = std::move(subset), options](const Dataset& d, const RngSeed&) {
                        return fit_ols(d, subset, options);
                      });
}

inline FitAlgorithm logistic_algorithm(std::optional<IndexList> subset = std::nullopt,
                                       LogisticOptions options = {}) {
  std::ostringstream ridge;
  ridge << options.ridge;
  ParamRecord params{{"ridge", ridge.str()}, {"intercept", options.intercept ? "true" : "false"}};
  if (subset) params["features"] = detail::subset_label(*subset);
  return FitAlgorithm("logistic", std::move(params),
                      [subset = std::move(subset), options](const Dataset& d, const RngSeed&) {
                        return fit_logistic(d, subset, options);
                      });
}

}  // namespace mcs
