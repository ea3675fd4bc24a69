#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/linear.hpp"
#include "mcs/model.hpp"
#include "mcs/rng.hpp"

namespace mcs {

struct ForestParams {
  int trees = 100;
  int max_depth = -1;  // negative: unlimited
  int min_leaf = 1;
  // Fraction of features tried per split; negative selects the task default
  // (1/3 for regression, sqrt(p)/p for classification).
  double feature_fraction = -1.0;
  bool bootstrap = true;
};

inline Index features_per_split(const ForestParams& params, Task task, Index p) {
  double m = 0.0;
  if (params.feature_fraction > 0.0) {
    m = std::floor(params.feature_fraction * static_cast<double>(p));
  } else if (task == Task::regression) {
    m = std::floor(static_cast<double>(p) / 3.0);
  } else {
    m = std::floor(std::sqrt(static_cast<double>(p)));
  }
  return std::clamp<Index>(static_cast<Index>(m), 1, std::max<Index>(p, 1));
}

// CART tree over real features. For 0/1 targets the variance criterion
// ranks splits exactly as Gini impurity does (n p (1-p) is both the sum of
// squared deviations and half the weighted Gini), so one builder serves
// regression and classification; leaves hold the mean target, which is the
// class-1 fraction for labels.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // split threshold for inner nodes, prediction for leaves
  };

  double predict_row(const Eigen::MatrixXd& x, Index row) const {
    std::int32_t at = 0;
    for (;;) {
      const Node& node = nodes_[static_cast<std::size_t>(at)];
      if (node.feature < 0) return node.value;
      at = x(row, node.feature) <= node.value ? node.left : node.right;
    }
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
  }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  // `columns` holds the sample column-major (p columns of length m); `rows`
  // lists the sample positions the tree may use.
  static DecisionTree build(const std::vector<std::vector<double>>& columns,
                            const std::vector<double>& y, std::vector<std::int32_t> rows,
                            const ForestParams& params, Index mtry, Rng& rng) {
    DecisionTree tree;
    Builder b{columns, y, params, mtry, rng, tree.nodes_, {}, {}};
    b.grow(rows, 0, static_cast<std::int32_t>(rows.size()), 0);
    return tree;
  }

 private:
  struct Builder {
    const std::vector<std::vector<double>>& columns;
    const std::vector<double>& y;
    const ForestParams& params;
    Index mtry;
    Rng& rng;
    std::vector<Node>& nodes;
    std::vector<std::pair<double, double>> buffer;
    std::vector<std::int32_t> feature_order;

    struct Candidate {
      bool valid = false;
      std::int32_t feature = -1;
      double threshold = 0.0;
      double score = -1.0;
    };

    // Best split on one feature: maximizes sumL^2/nL + sumR^2/nR.
    void scan_feature(const std::vector<std::int32_t>& rows, std::int32_t begin, std::int32_t end,
                      std::int32_t f, double total, Candidate& best) {
      const auto& col = columns[static_cast<std::size_t>(f)];
      const auto count = static_cast<std::size_t>(end - begin);
      buffer.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto r = static_cast<std::size_t>(rows[static_cast<std::size_t>(begin) + i]);
        buffer[i] = {col[r], y[r]};
      }
      std::sort(buffer.begin(), buffer.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (!(buffer.front().first < buffer.back().first)) return;  // constant feature
      const auto min_leaf = static_cast<std::size_t>(std::max(params.min_leaf, 1));
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        left_sum += buffer[i].second;
        const std::size_t nl = i + 1;
        if (!(buffer[i].first < buffer[i + 1].first)) continue;
        if (nl < min_leaf || count - nl < min_leaf) continue;
        const double nr = static_cast<double>(count - nl);
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) + right_sum * right_sum / nr;
        if (!best.valid || score > best.score) {
          best.valid = true;
          best.feature = f;
          best.score = score;
          best.threshold = 0.5 * (buffer[i].first + buffer[i + 1].first);
          // Midpoint can round up to the right value for adjacent doubles.
          if (!(best.threshold < buffer[i + 1].first)) best.threshold = buffer[i].first;
        }
      }
    }

    std::int32_t make_leaf(double value) {
      nodes.push_back(Node{-1, -1, -1, value});
      return static_cast<std::int32_t>(nodes.size() - 1);
    }

    std::int32_t grow(std::vector<std::int32_t>& rows, std::int32_t begin, std::int32_t end, int depth) {
      const auto count = static_cast<double>(end - begin);
      double sum = 0.0;
      for (std::int32_t i = begin; i < end; ++i) {
        const double v = y[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
        sum += v;
      }
      const double mean = sum / count;
      bool pure = true;
      const double first = y[static_cast<std::size_t>(rows[static_cast<std::size_t>(begin)])];
      for (std::int32_t i = begin + 1; i < end && pure; ++i) {
        pure = y[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] == first;
      }
      const bool depth_limited = params.max_depth >= 0 && depth >= params.max_depth;
      if (pure) return make_leaf(first);
      if (depth_limited || end - begin < 2 * std::max(params.min_leaf, 1)) {
        return make_leaf(mean);
      }

      // Random feature order; the first mtry form the candidate set, further
      // features are tried only if none of those admits a split.
      const auto p = static_cast<std::int32_t>(columns.size());
      feature_order.resize(static_cast<std::size_t>(p));
      std::iota(feature_order.begin(), feature_order.end(), 0);
      for (std::int32_t i = 0; i < p - 1; ++i) {
        const auto j = i + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(p - i)));
        std::swap(feature_order[static_cast<std::size_t>(i)], feature_order[static_cast<std::size_t>(j)]);
      }
      Candidate best;
      std::int32_t tried = 0;
      while (tried < p && !best.valid) {
        const std::int32_t take = tried == 0 ? static_cast<std::int32_t>(std::min<Index>(mtry, p)) : 1;
        std::vector<std::int32_t> batch(feature_order.begin() + tried, feature_order.begin() + tried + take);
        std::sort(batch.begin(), batch.end());
        for (auto f : batch) scan_feature(rows, begin, end, f, sum, best);
        tried += take;
      }
      if (!best.valid) return make_leaf(mean);

      const auto& col = columns[static_cast<std::size_t>(best.feature)];
      auto mid_it = std::partition(rows.begin() + begin, rows.begin() + end, [&](std::int32_t r) {
        return col[static_cast<std::size_t>(r)] <= best.threshold;
      });
      const auto mid = static_cast<std::int32_t>(mid_it - rows.begin());

      const auto self = static_cast<std::int32_t>(nodes.size());
      nodes.push_back(Node{best.feature, -1, -1, best.threshold});
      const std::int32_t left = grow(rows, begin, mid, depth + 1);
      const std::int32_t right = grow(rows, mid, end, depth + 1);
      nodes[static_cast<std::size_t>(self)].left = left;
      nodes[static_cast<std::size_t>(self)].right = right;
      return self;
    }
  };

  std::vector<Node> nodes_;
};

class RandomForestModel final : public ModelBase {
 public:
  RandomForestModel(std::vector<DecisionTree> trees, Task task)
      : trees_(std::move(trees)), task_(task) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (const auto& t : trees_) s += t.predict_row(x, i);
      out(i) = s / static_cast<double>(trees_.size());
    }
    return out;
  }

  std::string describe() const override {
    return std::string("forest[") + std::to_string(trees_.size()) + " trees, " +
           std::string(to_string(task_)) + "]";
  }

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  Task task_;
};

namespace detail {

// Rows sorted lexicographically by (features, target). Fitting on this order
// makes the forest independent of the input row order.
inline std::vector<Index> canonical_row_order(const Dataset& data) {
  std::vector<Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& x = data.features();
  const auto& y = data.target();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return y(a) < y(b);
  });
  return order;
}

}  // namespace detail

// Bagged CART ensemble. Tree t draws its bootstrap and feature subsets from
// derive(seed, tree, t).
inline Model fit_random_forest(const Dataset& train, const ForestParams& params, const RngSeed& seed) {
  if (train.rows() < 2) throw DataError("random forest needs at least 2 training rows");
  if (params.trees < 1) throw ConfigError("random forest needs trees >= 1");
  if (params.min_leaf < 1) throw ConfigError("random forest needs min_leaf >= 1");
  const Index n = train.rows();
  const Index p = train.cols();
  const auto order = detail::canonical_row_order(train);

  std::vector<std::vector<double>> columns(static_cast<std::size_t>(p),
                                           std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<double> y(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p; ++j) columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = train.features()(src, j);
    y[static_cast<std::size_t>(i)] = train.target()(src);
  }
  const Index mtry = features_per_split(params, train.task(), p);

  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.trees));
  std::vector<std::int32_t> rows(static_cast<std::size_t>(n));
  for (int t = 0; t < params.trees; ++t) {
    Rng rng(derive(seed, StreamTag::tree, {static_cast<std::uint64_t>(t)}));
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees.push_back(DecisionTree::build(columns, y, rows, params, mtry, rng));
  }
  return Model::make<RandomForestModel>(std::move(trees), train.task());
}

inline ParamRecord forest_param_record(const ForestParams& params) {
  std::ostringstream ff;
  ff << params.feature_fraction;
  return {{"trees", std::to_string(params.trees)},
          {"max_depth", std::to_string(params.max_depth)},
          {"min_leaf", std::to_string(params.min_leaf)},
          {"feature_fraction", params.feature_fraction > 0 ? ff.str() : "auto"},
          {"bootstrap", params.bootstrap ? "true" : "false"}};
}

inline FitAlgorithm forest_algorithm(ForestParams params = {}, std::optional<IndexList> subset = std::nullopt) {
  ParamRecord record = forest_param_record(params);
  if (subset) record["features"] = detail::subset_label(*subset);
  return FitAlgorithm("forest", std::move(record),
                      [params, subset = std::move(subset)](const Dataset& d, const RngSeed& s) {
                        if (!subset) return fit_random_forest(d, params, s);
                        detail::resolve_subset(subset, d.cols());
                        // Restrict to the selected columns and remap at prediction time.
                        Eigen::MatrixXd x(d.rows(), static_cast<Index>(subset->size()));
                        for (std::size_t j = 0; j < subset->size(); ++j) x.col(static_cast<Index>(j)) = d.features().col((*subset)[j]);
                        Model inner = fit_random_forest(Dataset(std::move(x), d.target(), d.task()), params, s);
                        struct Projected final : ModelBase {
                          Model inner;
                          IndexList cols;
                          Projected(Model m, IndexList c) : inner(std::move(m)), cols(std::move(c)) {}
                          Eigen::VectorXd predict(const Eigen::MatrixXd& xx) const override {
                            Eigen::MatrixXd sub(xx.rows(), static_cast<Index>(cols.size()));
                            for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Index>(j)) = xx.col(cols[j]);
                            return inner.predict(sub);
                          }
                          std::string describe() const override {
                            return inner.describe() + "[" + detail::subset_label(cols) + "]";
                          }
                        };
                        return Model::make<Projected>(std::move(inner), *subset);
                      });
}

}  // namespace mcs
