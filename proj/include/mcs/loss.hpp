#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"

namespace mcs {

inline constexpr double kLogLossClip = 1e-15;

class LossFn {
 public:
  enum class Kind { squared_error, log_loss };

  constexpr LossFn() = default;
  constexpr explicit LossFn(Kind kind) : kind_(kind) {}

  static constexpr LossFn squared_error() { return LossFn(Kind::squared_error); }
  static constexpr LossFn log_loss() { return LossFn(Kind::log_loss); }

  static LossFn parse(std::string_view name) {
    if (name == "squared_error" || name == "mse") return squared_error();
    if (name == "log_loss" || name == "logloss") return log_loss();
    throw ConfigError("unknown loss '" + std::string(name) + "' (expected squared_error|log_loss)");
  }

  // Squared error for regression, log loss for classification.
  static constexpr LossFn default_for(Task task) {
    return task == Task::regression ? squared_error() : log_loss();
  }

  constexpr Kind kind() const noexcept { return kind_; }

  std::string_view name() const noexcept {
    return kind_ == Kind::squared_error ? "squared_error" : "log_loss";
  }

  bool compatible_with(Task task) const noexcept {
    return kind_ == Kind::squared_error || task == Task::classification;
  }

  double operator()(double prediction, double target) const {
    if (kind_ == Kind::squared_error) {
      const double d = prediction - target;
      return d * d;
    }
    const double p = std::clamp(prediction, kLogLossClip, 1.0 - kLogLossClip);
    return target > 0.5 ? -std::log(p) : -std::log1p(-p);
  }

  friend constexpr bool operator==(LossFn, LossFn) = default;

 private:
  Kind kind_ = Kind::squared_error;
};

}  // namespace mcs
