#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/loss.hpp"
#include "mcs/model.hpp"
#include "mcs/rng.hpp"
#include "mcs/split.hpp"

namespace mcs {

// Pointwise test losses of one algorithm, one row per split.
struct SplitLosses {
  std::string algorithm;
  std::vector<std::vector<double>> rows;
};

// Loss differences l(f_r(D_j), Z) - l(f_s(D_j), Z) for Z in each test set,
// laid out by split then by test row.
struct LossDiffTable {
  std::vector<std::vector<double>> rows;
  std::string tested;
  std::string comparator;
  std::string loss;
  std::uint64_t plan_digest = 0;

  Index k() const noexcept { return static_cast<Index>(rows.size()); }

  Index size() const noexcept {
    Index t = 0;
    for (const auto& r : rows) t += static_cast<Index>(r.size());
    return t;
  }

  // Total entries over k: equals n_te for equal folds.
  double effective_test_size() const {
    return rows.empty() ? 0.0 : static_cast<double>(size()) / static_cast<double>(k());
  }

  LossDiffTable negated() const {
    LossDiffTable out = *this;
    for (auto& r : out.rows) {
      for (auto& v : r) v = -v;
    }
    std::swap(out.tested, out.comparator);
    return out;
  }

  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ plan_digest;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& r : rows) {
      mix(r.size());
      for (double v : r) {
        std::uint64_t bits = 0;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(v));
        mix(bits);
      }
    }
    return h;
  }
};

inline RngSeed fit_seed(const RngSeed& seed, std::size_t split, const FitAlgorithm& algorithm) {
  return derive(seed, StreamTag::fit, {static_cast<std::uint64_t>(split), algorithm.tag()});
}

// Fits `algorithm` on every training set and records its pointwise loss on
// the matching test set.
inline SplitLosses split_losses(const FitAlgorithm& algorithm, const Dataset& data, const SplitPlan& plan,
                                const LossFn& loss, const RngSeed& seed) {
  validate_plan(plan, data.rows());
  if (!loss.compatible_with(data.task())) {
    throw ConfigError(std::string(loss.name()) + " is not defined for " +
                      std::string(to_string(data.task())) + " data");
  }
  SplitLosses out;
  out.algorithm = algorithm.identity();
  out.rows.reserve(plan.splits.size());
  for (std::size_t j = 0; j < plan.splits.size(); ++j) {
    const auto& split = plan.splits[j];
    try {
      const Dataset train = data.subset(split.train);
      const Dataset test = data.subset(split.test);
      const Model model = algorithm.fit(train, fit_seed(seed, j, algorithm));
      const Eigen::VectorXd pred = model.predict(test.features());
      std::vector<double> row(static_cast<std::size_t>(test.rows()));
      for (Index i = 0; i < test.rows(); ++i) {
        row[static_cast<std::size_t>(i)] = loss(pred(i), test.target()(i));
        if (!std::isfinite(row[static_cast<std::size_t>(i)])) {
          throw NumericError("non-finite loss at test row " + std::to_string(split.test[static_cast<std::size_t>(i)]));
        }
      }
      out.rows.push_back(std::move(row));
    } catch (const Error& e) {
      rethrow_with_context(e, "split " + std::to_string(j) + " (" + out.algorithm + "): ");
    }
  }
  return out;
}

inline LossDiffTable difference(const SplitLosses& tested, const SplitLosses& comparator,
                                const LossFn& loss, const SplitPlan& plan) {
  if (tested.rows.size() != comparator.rows.size()) throw ConfigError("split loss tables disagree in split count");
  LossDiffTable table;
  table.tested = tested.algorithm;
  table.comparator = comparator.algorithm;
  table.loss = std::string(loss.name());
  table.plan_digest = plan.digest();
  table.rows.resize(tested.rows.size());
  for (std::size_t j = 0; j < tested.rows.size(); ++j) {
    const auto& a = tested.rows[j];
    const auto& b = comparator.rows[j];
    if (a.size() != b.size()) throw ConfigError("split loss tables disagree in test size");
    auto& row = table.rows[j];
    row.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) row[i] = a[i] - b[i];
  }
  return table;
}

inline LossDiffTable loss_diff_table(const FitAlgorithm& tested, const FitAlgorithm& comparator,
                                     const Dataset& data, const SplitPlan& plan, const LossFn& loss,
                                     const RngSeed& seed) {
  const SplitLosses a = split_losses(tested, data, plan, loss, seed);
  const SplitLosses b = split_losses(comparator, data, plan, loss, seed);
  return difference(a, b, loss, plan);
}

// Pooled mean over all entries.
inline double mean_risk_diff(const LossDiffTable& table) {
  const Index n = table.size();
  if (n == 0) throw ConfigError("mean of an empty loss-difference table");
  double sum = 0.0;
  for (const auto& r : table.rows) {
    for (double v : r) sum += v;
  }
  return sum / static_cast<double>(n);
}

// Square root of the test-size-weighted average of per-split unbiased sample
// variances, each split centered at its own mean.
inline double pooled_variance(const LossDiffTable& table) {
  if (table.rows.empty()) throw ConfigError("variance of an empty loss-difference table");
  double weighted = 0.0;
  double weight = 0.0;
  for (std::size_t j = 0; j < table.rows.size(); ++j) {
    const auto& r = table.rows[j];
    if (r.size() < 2) {
      throw DataError("split " + std::to_string(j) + " has " + std::to_string(r.size()) +
                      " test point(s); the variance needs at least 2");
    }
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double w = static_cast<double>(r.size());
    weighted += w * ss / (w - 1.0);
    weight += w;
  }
  return std::sqrt(weighted / weight);
}

struct ExpRiskStat {
  double value;      // may be +inf when the log value exceeds double range
  double log_value;
};

// k^-1 sum_j exp(omega * sum of split j), evaluated as a log-mean-exp.
inline ExpRiskStat exp_risk_stat(const LossDiffTable& table, double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ConfigError("omega must be finite and >= 0");
  if (table.rows.empty()) throw ConfigError("exp risk statistic of an empty table");
  if (omega == 0.0) return {1.0, 0.0};
  std::vector<double> exponents;
  exponents.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    double s = 0.0;
    for (double v : r) s += v;
    exponents.push_back(omega * s);
  }
  const double top = *std::max_element(exponents.begin(), exponents.end());
  double acc = 0.0;
  for (double e : exponents) acc += std::exp(e - top);
  const double log_value = top + std::log(acc) - std::log(static_cast<double>(exponents.size()));
  return {std::exp(log_value), log_value};
}

}  // namespace mcs
