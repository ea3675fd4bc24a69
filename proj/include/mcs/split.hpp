#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/rng.hpp"

namespace mcs {

struct Split {
  IndexList train;
  IndexList test;
};

// The k train/test index pairs. For k-fold plans with k not dividing n the
// first (n mod k) folds carry one extra test row, so test sizes differ by at
// most one; `n_te` then reports the largest.
struct SplitPlan {
  enum class Kind { holdout, kfold };

  Kind kind = Kind::holdout;
  std::vector<Split> splits;
  Index n = 0;

  Index k() const noexcept { return static_cast<Index>(splits.size()); }
  Index n_tr() const { return splits.empty() ? 0 : static_cast<Index>(splits.front().train.size()); }
  Index n_te() const { return splits.empty() ? 0 : static_cast<Index>(splits.front().test.size()); }

  // Test rows across all splits.
  Index total_test() const {
    Index t = 0;
    for (const auto& s : splits) t += static_cast<Index>(s.test.size());
    return t;
  }

  // FNV-1a over the index lists; links tables and outcomes back to a plan.
  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    };
    mix(static_cast<std::uint64_t>(n));
    for (const auto& s : splits) {
      mix(0xA5A5A5A5ULL);
      for (auto i : s.train) mix(static_cast<std::uint64_t>(i));
      mix(0x5A5A5A5AULL);
      for (auto i : s.test) mix(static_cast<std::uint64_t>(i));
    }
    return h;
  }
};

inline SplitPlan make_holdout_split(Index n, double train_fraction, const RngSeed& seed) {
  if (n < 2) throw ConfigError("holdout split needs n >= 2, got " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("holdout train fraction must lie in (0,1)");
  }
  const auto n_tr = static_cast<Index>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_tr < 1 || n - n_tr < 1) {
    throw ConfigError("holdout fraction " + std::to_string(train_fraction) +
                      " leaves an empty train or test set at n=" + std::to_string(n));
  }
  IndexList perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Split s;
  s.train.assign(perm.begin(), perm.begin() + n_tr);
  s.test.assign(perm.begin() + n_tr, perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  SplitPlan plan;
  plan.kind = SplitPlan::Kind::holdout;
  plan.n = n;
  plan.splits.push_back(std::move(s));
  return plan;
}

// Sequential folds: fold j tests the j-th contiguous block of rows.
inline SplitPlan make_kfold_split(Index n, Index k) {
  if (k < 2 || k > n) {
    throw ConfigError("k-fold split needs 2 <= k <= n, got k=" + std::to_string(k) +
                      ", n=" + std::to_string(n));
  }
  SplitPlan plan;
  plan.kind = SplitPlan::Kind::kfold;
  plan.n = n;
  const Index base = n / k;
  const Index extra = n % k;
  Index start = 0;
  for (Index j = 0; j < k; ++j) {
    const Index size = base + (j < extra ? 1 : 0);
    Split s;
    s.train.reserve(static_cast<std::size_t>(n - size));
    s.test.reserve(static_cast<std::size_t>(size));
    for (Index i = 0; i < n; ++i) {
      if (i >= start && i < start + size) {
        s.test.push_back(i);
      } else {
        s.train.push_back(i);
      }
    }
    plan.splits.push_back(std::move(s));
    start += size;
  }
  return plan;
}

inline void validate_plan(const SplitPlan& plan, Index n) {
  if (plan.splits.empty()) throw ConfigError("split plan has no splits");
  if (plan.n != n) {
    throw ConfigError("split plan built for n=" + std::to_string(plan.n) +
                      " applied to a dataset with n=" + std::to_string(n));
  }
  for (const auto& s : plan.splits) {
    if (s.train.empty() || s.test.empty()) throw ConfigError("split plan has an empty train or test set");
    for (auto i : s.train) {
      if (i < 0 || i >= n) throw ConfigError("split index out of range");
    }
    for (auto i : s.test) {
      if (i < 0 || i >= n) throw ConfigError("split index out of range");
    }
  }
}

}  // namespace mcs
