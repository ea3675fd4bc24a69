#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/loss.hpp"
#include "mcs/rng.hpp"

namespace mcs {

class ModelBase {
 public:
  virtual ~ModelBase() = default;
  // One prediction per row: conditional means or class-1 probabilities.
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& x) const = 0;
  virtual std::string describe() const = 0;
};

// Immutable fitted predictor with shared ownership; copies are cheap.
class Model {
 public:
  Model() = default;
  explicit Model(std::shared_ptr<const ModelBase> impl) : impl_(std::move(impl)) {}

  template <class T, class... Args>
  static Model make(Args&&... args) {
    return Model(std::make_shared<const T>(std::forward<Args>(args)...));
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    if (!impl_) throw NumericError("predict called on an empty model");
    return impl_->predict(x);
  }

  std::string describe() const { return impl_ ? impl_->describe() : "<empty>"; }

  template <class T>
  const T* as() const noexcept {
    return dynamic_cast<const T*>(impl_.get());
  }

  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

 private:
  std::shared_ptr<const ModelBase> impl_;
};

// Flat hyperparameter record, rendered in key order for identities.
using ParamRecord = std::map<std::string, std::string>;

// A named fitting procedure mapping (training rows, seed) to a Model. The
// identity string doubles as the algorithm tag for seed derivation, so two
// algorithms with the same identity fit identical models on identical data.
class FitAlgorithm {
 public:
  using FitFn = std::function<Model(const Dataset&, const RngSeed&)>;

  FitAlgorithm() = default;
  FitAlgorithm(std::string name, ParamRecord params, FitFn fit)
      : name_(std::move(name)), params_(std::move(params)), fit_(std::move(fit)) {}

  const std::string& name() const noexcept { return name_; }
  const ParamRecord& params() const noexcept { return params_; }

  std::string identity() const {
    std::string id = name_;
    if (!params_.empty()) {
      id += '(';
      bool first = true;
      for (const auto& [k, v] : params_) {
        if (!first) id += ',';
        id += k + '=' + v;
        first = false;
      }
      id += ')';
    }
    return id;
  }

  std::uint64_t tag() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : identity()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  Model fit(const Dataset& train, const RngSeed& seed) const {
    if (!fit_) throw ConfigError("fit algorithm '" + name_ + "' has no fit procedure");
    return fit_(train, seed);
  }

  explicit operator bool() const noexcept { return static_cast<bool>(fit_); }

 private:
  std::string name_;
  ParamRecord params_;
  FitFn fit_;
};

// Predicts one fixed value everywhere.
class ConstantModel final : public ModelBase {
 public:
  explicit ConstantModel(double value) : value_(value) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Constant(x.rows(), value_);
  }
  std::string describe() const override { return "constant(" + std::to_string(value_) + ")"; }
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// Ignores the training data and always yields `model`.
inline FitAlgorithm constant_algorithm(Model model, std::string label = {}) {
  if (label.empty()) label = model.describe();
  return FitAlgorithm("fixed", {{"model", label}},
                      [m = std::move(model)](const Dataset&, const RngSeed&) { return m; });
}

inline double mean_loss(const Model& model, const Dataset& data, const LossFn& loss) {
  const Eigen::VectorXd pred = model.predict(data.features());
  double total = 0.0;
  for (Index i = 0; i < data.rows(); ++i) total += loss(pred(i), data.target()(i));
  return total / static_cast<double>(data.rows());
}

// Index of the candidate with the smallest mean training loss; ties go to the
// lowest index.
inline std::size_t erm_index(std::span<const Model> candidates, const Dataset& train,
                             const LossFn& loss) {
  if (candidates.empty()) throw ConfigError("empirical risk minimization over an empty candidate list");
  std::size_t best = 0;
  double best_loss = mean_loss(candidates[0], train, loss);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double l = mean_loss(candidates[i], train, loss);
    if (l < best_loss) {
      best_loss = l;
      best = i;
    }
  }
  return best;
}

inline Model erm_over_finite_class(std::span<const Model> candidates, const Dataset& train,
                                   const LossFn& loss) {
  return candidates[erm_index(candidates, train, loss)];
}

}  // namespace mcs
