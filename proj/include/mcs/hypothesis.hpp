#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/linear.hpp"
#include "mcs/loss.hpp"
#include "mcs/model.hpp"
#include "mcs/quantile.hpp"
#include "mcs/risk.hpp"
#include "mcs/split.hpp"

namespace mcs {

// One evaluation of a one-sided test: reject exactly when statistic > threshold.
struct TestOutcome {
  std::string method;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  double alpha = 0.05;
  double epsilon = 0.0;
  std::optional<double> omega;
  std::uint64_t table_digest = 0;
  std::map<std::string, double> details;

  bool consistent() const noexcept { return reject == (statistic > threshold); }
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1), got " + std::to_string(alpha));
}

inline void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be finite and >= 0");
}

inline TestOutcome decide(std::string method, double statistic, double threshold, double alpha, double epsilon) {
  TestOutcome out;
  out.method = std::move(method);
  out.statistic = statistic;
  out.threshold = threshold;
  out.reject = statistic > threshold;
  out.alpha = alpha;
  out.epsilon = epsilon;
  return out;
}

}  // namespace detail

// Where epsilon enters the studentized test. `standardized` adds it to the
// normal quantile; `raw` adds it to the threshold on the loss scale.
enum class MarginScale { standardized, raw };

inline std::string_view to_string(MarginScale s) { return s == MarginScale::standardized ? "standardized" : "raw"; }

// Studentized test: reject iff mean > N^{-1/2} sigma (z_{1-alpha} + eps),
// N the total number of test entries (k * n_te for equal folds). A zero
// pooled deviation collapses the threshold to 0 (or to eps on the raw scale).
inline TestOutcome phi_clt(const LossDiffTable& table, double alpha, double epsilon,
                           MarginScale scale = MarginScale::standardized) {
  detail::check_alpha(alpha);
  detail::check_epsilon(epsilon);
  const double mean = mean_risk_diff(table);
  const double sigma = pooled_variance(table);
  const double z = normal_quantile(1.0 - alpha);
  const double n = static_cast<double>(table.size());
  const double se = sigma / std::sqrt(n);
  const double threshold = scale == MarginScale::standardized ? se * (z + epsilon) : se * z + epsilon;
  TestOutcome out = detail::decide("clt", mean, threshold, alpha, epsilon);
  out.table_digest = table.digest();
  out.details = {{"sigma", sigma},
                 {"k", static_cast<double>(table.k())},
                 {"n_te", table.effective_test_size()},
                 {"z", z},
                 {"degenerate", sigma == 0.0 ? 1.0 : 0.0},
                 {"raw_margin", scale == MarginScale::raw ? 1.0 : 0.0}};
  return out;
}

// Conservative hold-out variant for a finite class: the statistic is the
// smallest mean difference over all candidates, while sigma comes from the
// candidate minimizing training loss.
inline TestOutcome phi_clt_inf(std::span<const Model> candidates, const FitAlgorithm& comparator,
                               const Dataset& data, const SplitPlan& plan, const LossFn& loss, double alpha,
                               double epsilon, const RngSeed& seed,
                               MarginScale scale = MarginScale::standardized) {
  if (plan.k() != 1) throw ConfigError("the infimum studentized test requires a single hold-out split (k=1)");
  if (candidates.empty()) throw ConfigError("the infimum studentized test needs at least one candidate");
  detail::check_alpha(alpha);
  detail::check_epsilon(epsilon);
  validate_plan(plan, data.rows());

  const Dataset train = data.subset(plan.splits.front().train);
  const std::size_t erm = erm_index(candidates, train, loss);
  const SplitLosses comp = split_losses(comparator, data, plan, loss, seed);

  double best = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  LossDiffTable erm_table;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const FitAlgorithm fixed = constant_algorithm(candidates[c]);
    const LossDiffTable table = difference(split_losses(fixed, data, plan, loss, seed), comp, loss, plan);
    const double m = mean_risk_diff(table);
    if (m < best) {
      best = m;
      argmin = c;
    }
    if (c == erm) erm_table = table;
  }
  const double sigma = pooled_variance(erm_table);
  const double z = normal_quantile(1.0 - alpha);
  const double se = sigma / std::sqrt(static_cast<double>(erm_table.size()));
  const double threshold = scale == MarginScale::standardized ? se * (z + epsilon) : se * z + epsilon;
  TestOutcome out = detail::decide("clt_inf", best, threshold, alpha, epsilon);
  out.table_digest = erm_table.digest();
  out.details = {{"sigma", sigma},
                 {"k", 1.0},
                 {"n_te", erm_table.effective_test_size()},
                 {"z", z},
                 {"erm_index", static_cast<double>(erm)},
                 {"argmin_index", static_cast<double>(argmin)},
                 {"candidates", static_cast<double>(candidates.size())}};
  return out;
}

// Universal-inference e-value test: reject iff mean_j exp(omega S_j) - eps > 1/alpha.
inline TestOutcome phi_ui(const LossDiffTable& table, double omega, double alpha, double epsilon) {
  detail::check_alpha(alpha);
  detail::check_epsilon(epsilon);
  const ExpRiskStat e = exp_risk_stat(table, omega);
  double statistic = e.value - epsilon;
  if (std::isinf(e.value)) statistic = std::numeric_limits<double>::infinity();
  TestOutcome out = detail::decide("ui", statistic, 1.0 / alpha, alpha, epsilon);
  out.omega = omega;
  out.table_digest = table.digest();
  out.details = {{"log_e_value", e.log_value}, {"k", static_cast<double>(table.k())}};
  return out;
}

struct LossRange {
  double low = -1.0;
  double high = 1.0;
};

// Hoeffding deviation for a sum of n independent terms each in a range of
// width `width`: width * sqrt(n ln(1/alpha) / 2).
inline double hoeffding_delta(Index n, double width, double alpha) {
  return width * std::sqrt(static_cast<double>(n) * std::log(1.0 / alpha) / 2.0);
}

// Concentration test on a single hold-out table: reject iff the summed
// differences exceed delta(alpha) + eps * N.
inline TestOutcome phi_ci(const LossDiffTable& table, LossRange range, double alpha, double epsilon) {
  detail::check_alpha(alpha);
  detail::check_epsilon(epsilon);
  if (table.k() != 1) throw ConfigError("the concentration test requires a single hold-out split (k=1)");
  if (!(range.low < range.high)) throw ConfigError("loss-difference range must satisfy low < high");
  double sum = 0.0;
  for (const auto& r : table.rows) {
    for (double v : r) {
      if (v < range.low || v > range.high) {
        throw DataError("loss difference " + std::to_string(v) + " outside the declared range [" +
                        std::to_string(range.low) + ", " + std::to_string(range.high) + "]");
      }
      sum += v;
    }
  }
  const Index n = table.size();
  const double delta = hoeffding_delta(n, range.high - range.low, alpha);
  TestOutcome out = detail::decide("ci", sum, delta + epsilon * static_cast<double>(n), alpha, epsilon);
  out.table_digest = table.digest();
  out.details = {{"delta", delta}, {"n", static_cast<double>(n)}, {"range_low", range.low}, {"range_high", range.high}};
  return out;
}

inline double residual_sum_of_squares(const Dataset& data, const IndexList& features) {
  const Model m = fit_ols(data, features);
  const Eigen::VectorXd r = data.target() - m.predict(data.features());
  return r.squaredNorm();
}

// Likelihood ratio test between nested Gaussian linear models (both with an
// intercept): n ln(RSS_sub / RSS_full) against chi^2_{|full|-|sub|}(1-alpha).
inline TestOutcome lrt_nested_gaussian(const IndexList& sub_features, const IndexList& full_features,
                                       const Dataset& data, double alpha) {
  detail::check_alpha(alpha);
  if (data.task() != Task::regression) throw ConfigError("the Gaussian likelihood ratio test needs regression data");
  for (auto f : sub_features) {
    if (std::find(full_features.begin(), full_features.end(), f) == full_features.end()) {
      throw ConfigError("feature " + std::to_string(f) + " of the restricted model is not in the full model");
    }
  }
  const Index n = data.rows();
  if (n <= static_cast<Index>(full_features.size()) + 1) {
    throw DataError("likelihood ratio test needs n > |full| + 1");
  }
  const double rss_sub = residual_sum_of_squares(data, sub_features);
  const double rss_full = residual_sum_of_squares(data, full_features);
  const int df = static_cast<int>(full_features.size()) - static_cast<int>(sub_features.size());
  double statistic = 0.0;
  if (df > 0) {
    statistic = rss_full > 0.0 ? static_cast<double>(n) * std::log(rss_sub / rss_full)
                               : std::numeric_limits<double>::infinity();
  }
  const double threshold = df > 0 ? chisq_quantile(1.0 - alpha, df) : 0.0;
  TestOutcome out = detail::decide("lrt", statistic, threshold, alpha, 0.0);
  out.details = {{"df", static_cast<double>(df)}, {"rss_sub", rss_sub}, {"rss_full", rss_full}};
  return out;
}

enum class TestMethod { clt, ui, ci };

inline std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::clt: return "clt";
    case TestMethod::ui: return "ui";
    case TestMethod::ci: return "ci";
  }
  return "clt";
}

inline TestMethod parse_method(std::string_view s) {
  if (s == "clt") return TestMethod::clt;
  if (s == "ui") return TestMethod::ui;
  if (s == "ci") return TestMethod::ci;
  throw ConfigError("unknown test method '" + std::string(s) + "' (expected clt|ui|ci)");
}

struct TestSettings {
  TestMethod method = TestMethod::clt;
  double alpha = 0.05;
  double epsilon = 1e-6;
  double omega = 0.0;
  MarginScale margin = MarginScale::standardized;
  std::optional<LossRange> ci_range;
};

inline TestOutcome run_test(const LossDiffTable& table, const TestSettings& s) {
  switch (s.method) {
    case TestMethod::clt: return phi_clt(table, s.alpha, s.epsilon, s.margin);
    case TestMethod::ui: return phi_ui(table, s.omega, s.alpha, s.epsilon);
    case TestMethod::ci:
      if (!s.ci_range) throw ConfigError("the ci method needs a loss-difference range");
      return phi_ci(table, *s.ci_range, s.alpha, s.epsilon);
  }
  throw ConfigError("unknown test method");
}

}  // namespace mcs
