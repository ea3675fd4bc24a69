#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcs/error.hpp"

namespace mcs {

enum class Task { regression, classification };

inline std::string_view to_string(Task t) {
  return t == Task::regression ? "regression" : "classification";
}

inline Task parse_task(std::string_view s) {
  if (s == "regression") return Task::regression;
  if (s == "classification") return Task::classification;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected regression|classification)");
}

using Index = std::ptrdiff_t;
using IndexList = std::vector<Index>;

// The sample: n rows of p features plus a target. Classification labels are
// stored as 0.0 / 1.0.
class Dataset {
 public:
  Dataset() = default;

  Dataset(Eigen::MatrixXd features, Eigen::VectorXd target, Task task,
          std::vector<std::string> column_names = {})
      : features_(std::move(features)),
        target_(std::move(target)),
        task_(task),
        column_names_(std::move(column_names)) {
    validate();
  }

  Index rows() const noexcept { return features_.rows(); }
  Index cols() const noexcept { return features_.cols(); }
  Task task() const noexcept { return task_; }

  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const Eigen::VectorXd& target() const noexcept { return target_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  // Rows in the given order; indices must lie in [0, rows()).
  Dataset subset(std::span<const Index> idx) const {
    Eigen::MatrixXd x(static_cast<Index>(idx.size()), cols());
    Eigen::VectorXd y(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      x.row(static_cast<Index>(i)) = features_.row(idx[i]);
      y(static_cast<Index>(i)) = target_(idx[i]);
    }
    Dataset out;
    out.features_ = std::move(x);
    out.target_ = std::move(y);
    out.task_ = task_;
    out.column_names_ = column_names_;
    return out;
  }

  Dataset with_target(Eigen::VectorXd target) const {
    return Dataset(features_, std::move(target), task_, column_names_);
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.task_ == b.task_ && a.features_.rows() == b.features_.rows() &&
           a.features_.cols() == b.features_.cols() && a.features_ == b.features_ &&
           a.target_ == b.target_;
  }

 private:
  void validate() const {
    if (features_.rows() < 1) throw DataError("dataset must contain at least one row");
    if (features_.rows() != target_.size()) {
      throw DataError("feature rows (" + std::to_string(features_.rows()) +
                      ") differ from target length (" + std::to_string(target_.size()) + ")");
    }
    if (!column_names_.empty() && static_cast<Index>(column_names_.size()) != features_.cols()) {
      throw DataError("column name count does not match feature count");
    }
    for (Index i = 0; i < features_.rows(); ++i) {
      for (Index j = 0; j < features_.cols(); ++j) {
        if (!std::isfinite(features_(i, j))) {
          throw DataError("non-finite feature at row " + std::to_string(i) + ", column " +
                          std::to_string(j));
        }
      }
      const double y = target_(i);
      if (!std::isfinite(y)) throw DataError("non-finite target at row " + std::to_string(i));
      if (task_ == Task::classification && y != 0.0 && y != 1.0) {
        throw DataError("classification target at row " + std::to_string(i) +
                        " is not 0 or 1");
      }
    }
  }

  Eigen::MatrixXd features_;
  Eigen::VectorXd target_;
  Task task_ = Task::regression;
  std::vector<std::string> column_names_;
};

}  // namespace mcs
