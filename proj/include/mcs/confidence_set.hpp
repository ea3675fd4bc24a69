#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"
#include "mcs/hypothesis.hpp"
#include "mcs/loss.hpp"
#include "mcs/model.hpp"
#include "mcs/risk.hpp"
#include "mcs/split.hpp"

namespace mcs {

// One model class H_r: the algorithm selecting a model from it and, when the
// class is finite, its enumerated candidates. A class without a comparator
// is a reference: it is never tested and always retained. By default every
// class is compared with the last (most complex) class, which is itself the
// reference.
struct ClassSpec {
  std::string name;
  FitAlgorithm algorithm;
  std::vector<Model> candidates;
  std::optional<Index> comparator;
};

enum class Strategy { selective, uniform };
enum class Regime { pointwise, bonferroni_uniform };

inline std::string_view to_string(Strategy s) { return s == Strategy::selective ? "selective" : "uniform"; }
inline std::string_view to_string(Regime r) { return r == Regime::pointwise ? "pointwise" : "bonferroni_uniform"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "selective") return Strategy::selective;
  if (s == "uniform") return Strategy::uniform;
  throw ConfigError("unknown strategy '" + std::string(s) + "' (expected selective|uniform)");
}

struct ConfidenceSetResult {
  std::vector<Index> retained;
  std::vector<TestOutcome> outcomes;
  std::vector<std::string> class_names;
  std::vector<std::optional<Index>> comparators;
  Regime regime = Regime::pointwise;
  Strategy strategy = Strategy::selective;
  double alpha = 0.05;

  Index d() const noexcept { return static_cast<Index>(outcomes.size()); }

  bool contains(Index r) const { return std::binary_search(retained.begin(), retained.end(), r); }

  bool consistent() const {
    std::vector<Index> expect;
    for (Index r = 0; r < d(); ++r) {
      if (!outcomes[static_cast<std::size_t>(r)].reject) expect.push_back(r);
    }
    return expect == retained;
  }
};

inline double bonferroni_level(double alpha, Index d) {
  if (d < 1) throw ConfigError("Bonferroni adjustment needs d >= 1");
  return alpha / static_cast<double>(d);
}

// Selects from a finite class by minimizing training loss.
inline FitAlgorithm erm_algorithm(std::vector<Model> candidates, LossFn loss, std::string label) {
  return FitAlgorithm("erm", {{"class", std::move(label)}, {"loss", std::string(loss.name())}},
                      [c = std::move(candidates), loss](const Dataset& train, const RngSeed&) {
                        return erm_over_finite_class(c, train, loss);
                      });
}

struct McsSettings {
  TestSettings test;
  Strategy strategy = Strategy::selective;
  Regime regime = Regime::pointwise;
};

namespace detail {

inline std::vector<std::optional<Index>> resolve_comparators(const std::vector<ClassSpec>& classes) {
  const auto d = static_cast<Index>(classes.size());
  std::vector<std::optional<Index>> out(classes.size());
  for (Index r = 0; r < d; ++r) {
    const auto& c = classes[static_cast<std::size_t>(r)];
    if (c.comparator) {
      if (*c.comparator < 0 || *c.comparator >= d) {
        throw ConfigError("class " + std::to_string(r) + " has comparator " + std::to_string(*c.comparator) +
                          " outside [0, " + std::to_string(d) + ")");
      }
      if (*c.comparator == r) throw ConfigError("class " + std::to_string(r) + " cannot be its own comparator");
      out[static_cast<std::size_t>(r)] = c.comparator;
    } else if (r != d - 1) {
      out[static_cast<std::size_t>(r)] = d - 1;
    }
  }
  return out;
}

inline std::vector<FitAlgorithm> class_algorithms(const std::vector<ClassSpec>& classes, const LossFn& loss) {
  std::vector<FitAlgorithm> algorithms;
  algorithms.reserve(classes.size());
  for (std::size_t r = 0; r < classes.size(); ++r) {
    const auto& c = classes[r];
    if (!c.algorithm && c.candidates.empty()) {
      throw ConfigError("class " + std::to_string(r) + " has neither an algorithm nor candidates");
    }
    algorithms.push_back(c.algorithm ? c.algorithm
                                     : erm_algorithm(c.candidates, loss, c.name.empty() ? std::to_string(r) : c.name));
  }
  return algorithms;
}

inline std::vector<std::string> class_names(const std::vector<ClassSpec>& classes) {
  std::vector<std::string> names;
  for (std::size_t r = 0; r < classes.size(); ++r) {
    names.push_back(classes[r].name.empty() ? "class" + std::to_string(r) : classes[r].name);
  }
  return names;
}

}  // namespace detail

// Loss-difference tables of every tested class against its comparator under
// the selective strategy; reference classes get no table. Each class is fit
// once per split, however many classes share it as comparator.
inline std::vector<std::optional<LossDiffTable>> selective_tables(const std::vector<ClassSpec>& classes,
                                                                  const Dataset& data, const SplitPlan& plan,
                                                                  const LossFn& loss, const RngSeed& seed) {
  if (classes.size() < 2) throw ConfigError("model class selection needs at least 2 classes");
  validate_plan(plan, data.rows());
  const auto comparators = detail::resolve_comparators(classes);
  const auto algorithms = detail::class_algorithms(classes, loss);
  std::map<Index, SplitLosses> cache;
  auto losses_of = [&](Index r) -> const SplitLosses& {
    auto it = cache.find(r);
    if (it == cache.end()) {
      it = cache.emplace(r, split_losses(algorithms[static_cast<std::size_t>(r)], data, plan, loss, seed)).first;
    }
    return it->second;
  };
  std::vector<std::optional<LossDiffTable>> tables(classes.size());
  for (std::size_t r = 0; r < classes.size(); ++r) {
    if (const auto s = comparators[r]) tables[r] = difference(losses_of(static_cast<Index>(r)), losses_of(*s), loss, plan);
  }
  return tables;
}

// Runs the configured test on precomputed selective tables. Under the
// Bonferroni regime every test runs at alpha / d.
inline ConfidenceSetResult confidence_set_from_tables(const std::vector<std::optional<LossDiffTable>>& tables,
                                                      std::vector<std::string> names,
                                                      std::vector<std::optional<Index>> comparators,
                                                      const McsSettings& settings) {
  const auto d = static_cast<Index>(tables.size());
  TestSettings test = settings.test;
  if (settings.regime == Regime::bonferroni_uniform) test.alpha = bonferroni_level(test.alpha, d);
  ConfidenceSetResult result;
  result.regime = settings.regime;
  result.strategy = Strategy::selective;
  result.alpha = settings.test.alpha;
  result.class_names = std::move(names);
  result.comparators = std::move(comparators);
  for (Index r = 0; r < d; ++r) {
    const auto& t = tables[static_cast<std::size_t>(r)];
    result.outcomes.push_back(t ? run_test(*t, test) : detail::decide("reference", 0.0, 0.0, test.alpha, test.epsilon));
    if (!result.outcomes.back().reject) result.retained.push_back(r);
  }
  return result;
}

// Tests psi_r for every class and keeps the classes that are not rejected.
// Selective: psi_r tests the algorithm's own fits. Uniform: psi_r rejects
// only if the test rejects for every candidate of the class.
inline ConfidenceSetResult build_confidence_set(const std::vector<ClassSpec>& classes, const Dataset& data,
                                                const SplitPlan& plan, const LossFn& loss,
                                                const McsSettings& settings, const RngSeed& seed) {
  const auto d = static_cast<Index>(classes.size());
  if (d < 2) throw ConfigError("model class selection needs at least 2 classes");
  validate_plan(plan, data.rows());
  const auto comparators = detail::resolve_comparators(classes);

  if (settings.strategy == Strategy::selective) {
    return confidence_set_from_tables(selective_tables(classes, data, plan, loss, seed), detail::class_names(classes),
                                      comparators, settings);
  }

  for (Index r = 0; r < d; ++r) {
    const auto& c = classes[static_cast<std::size_t>(r)];
    if (comparators[static_cast<std::size_t>(r)] && c.candidates.empty()) {
      throw ConfigError("class '" + c.name + "' (" + std::to_string(r) +
                        ") cannot be enumerated, so the uniform strategy is unavailable; "
                        "use --strategy selective instead");
    }
  }
  if (settings.test.method == TestMethod::clt && plan.k() != 1) {
    throw ConfigError("the uniform strategy with the clt method needs a hold-out split (k=1)");
  }
  const auto algorithms = detail::class_algorithms(classes, loss);
  TestSettings test = settings.test;
  if (settings.regime == Regime::bonferroni_uniform) test.alpha = bonferroni_level(test.alpha, d);

  ConfidenceSetResult result;
  result.regime = settings.regime;
  result.strategy = Strategy::uniform;
  result.alpha = settings.test.alpha;
  result.comparators = comparators;
  result.class_names = detail::class_names(classes);
  std::map<Index, SplitLosses> comparator_losses;
  for (Index r = 0; r < d; ++r) {
    const auto& spec = classes[static_cast<std::size_t>(r)];
    const auto s = comparators[static_cast<std::size_t>(r)];
    if (!s) {
      result.outcomes.push_back(detail::decide("reference", 0.0, 0.0, test.alpha, test.epsilon));
      continue;
    }
    const FitAlgorithm& comp_alg = algorithms[static_cast<std::size_t>(*s)];
    if (test.method == TestMethod::clt) {
      result.outcomes.push_back(
          phi_clt_inf(spec.candidates, comp_alg, data, plan, loss, test.alpha, test.epsilon, seed, test.margin));
      continue;
    }
    auto it = comparator_losses.find(*s);
    if (it == comparator_losses.end()) {
      it = comparator_losses.emplace(*s, split_losses(comp_alg, data, plan, loss, seed)).first;
    }
    // All candidates share one threshold, so the smallest statistic carries
    // the decision.
    std::optional<TestOutcome> weakest;
    for (const auto& m : spec.candidates) {
      const LossDiffTable table =
          difference(split_losses(constant_algorithm(m), data, plan, loss, seed), it->second, loss, plan);
      TestOutcome o = run_test(table, test);
      if (!weakest || o.statistic < weakest->statistic) weakest = std::move(o);
    }
    weakest->method += "_inf";
    weakest->details["candidates"] = static_cast<double>(spec.candidates.size());
    result.outcomes.push_back(std::move(*weakest));
  }
  for (Index r = 0; r < d; ++r) {
    if (!result.outcomes[static_cast<std::size_t>(r)].reject) result.retained.push_back(r);
  }
  return result;
}

struct SetMetrics {
  Index size = 0;
  bool uniform_coverage = false;        // truth is a subset of the retained set
  std::optional<bool> designated_covered;  // designated index retained
};

inline SetMetrics set_metrics(const ConfidenceSetResult& result, const std::vector<Index>& truth,
                              std::optional<Index> designated = std::nullopt) {
  if (truth.empty()) throw ConfigError("the true optimal set must be non-empty");
  const Index d = result.d();
  for (auto t : truth) {
    if (t < 0 || t >= d) throw ConfigError("true class index " + std::to_string(t) + " outside [0, " + std::to_string(d) + ")");
  }
  SetMetrics m;
  m.size = static_cast<Index>(result.retained.size());
  m.uniform_coverage = std::all_of(truth.begin(), truth.end(), [&](Index t) { return result.contains(t); });
  if (designated) {
    if (*designated < 0 || *designated >= d) throw ConfigError("designated class index out of range");
    m.designated_covered = result.contains(*designated);
  }
  return m;
}

}  // namespace mcs
