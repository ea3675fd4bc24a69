#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mcs/confidence_set.hpp"
#include "mcs/dataset.hpp"
#include "mcs/dgp.hpp"
#include "mcs/error.hpp"
#include "mcs/hypothesis.hpp"
#include "mcs/learners.hpp"
#include "mcs/risk.hpp"
#include "mcs/rng.hpp"
#include "mcs/split.hpp"

namespace mcs {

// ---------------------------------------------------------------------------
// Rates

struct RateEstimate {
  Index successes = 0;
  Index trials = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval.
inline RateEstimate wilson(Index successes, Index trials, double z = kZ95) {
  if (trials < 1) throw ConfigError("rate estimate needs at least one trial");
  if (successes < 0 || successes > trials) throw ConfigError("successes must lie in [0, trials]");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  RateEstimate r;
  r.successes = successes;
  r.trials = trials;
  r.rate = p;
  r.ci_low = std::clamp(center - half, 0.0, p);
  r.ci_high = std::clamp(center + half, p, 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Work pool

inline unsigned default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1U : hc;
}

// Calls fn(i) for i in [0, count) on up to `workers` threads. Results must be
// written to per-index slots; the first failing index (lowest i) is rethrown
// with the index attached.
template <class Fn>
void parallel_for(Index count, unsigned workers, Fn&& fn) {
  if (count <= 0) return;
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  auto body = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  for (Index i = 0; i < count; ++i) {
    if (!errors[static_cast<std::size_t>(i)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
    } catch (const Error& e) {
      rethrow_with_context(e, "replicate " + std::to_string(i) + ": ");
    } catch (const std::exception& e) {
      throw NumericError("replicate " + std::to_string(i) + ": " + e.what());
    }
  }
}

inline RngSeed replicate_seed(const RngSeed& master, Index replicate) {
  return derive(master, StreamTag::replicate, {static_cast<std::uint64_t>(replicate)});
}

// ---------------------------------------------------------------------------
// Data-generating processes

struct DgpSpec {
  enum class Family { mars, feature_selection, bernoulli_null, fixed };

  Family family = Family::mars;
  Index n = 500;
  double gamma = 0.0;  // mars nonlinearity
  double nu = 1.0;     // feature-selection signal-to-noise
  double rho = 0.35;   // feature-selection covariance decay
  double p = 0.5;      // bernoulli_null success probability
  double noise = 0.0;  // injected noise level in [0, 0.25]
  NoiseScale noise_scale = NoiseScale::variance;
  std::shared_ptr<const Dataset> data;  // base sample for Family::fixed

  Dataset draw(const RngSeed& replicate) const {
    Dataset base;
    const RngSeed ds = derive(replicate, StreamTag::dataset);
    switch (family) {
      case Family::mars: base = gen_mars(n, gamma, ds); break;
      case Family::feature_selection: base = gen_feature_selection(n, nu, rho, ds); break;
      case Family::bernoulli_null: base = gen_bernoulli_null(n, p, ds); break;
      case Family::fixed:
        if (!data) throw ConfigError("fixed data-generating process without a dataset");
        base = *data;
        break;
    }
    if (noise > 0.0) return inject_noise(base, noise, derive(replicate, StreamTag::noise), noise_scale);
    return base;
  }

  Index sample_size() const { return family == Family::fixed && data ? data->rows() : n; }

  // Optimal classes for the two-class setups (class 0 tested against class 1):
  // mars compares linear with forest, bernoulli_null compares the constants 0
  // and 1. Empty when the truth is not known from the parameters.
  std::optional<std::vector<Index>> two_class_truth() const {
    switch (family) {
      case Family::mars: return gamma == 0.0 ? std::vector<Index>{0, 1} : std::vector<Index>{1};
      case Family::bernoulli_null:
        if (p < 0.5) return std::vector<Index>{0};
        if (p > 0.5) return std::vector<Index>{1};
        return std::vector<Index>{0, 1};
      default: return std::nullopt;
    }
  }
};

// ---------------------------------------------------------------------------
// Two-class test configurations

struct SplitSpec {
  SplitPlan::Kind kind = SplitPlan::Kind::kfold;
  double train_fraction = 0.5;
  Index k = 10;

  SplitPlan make(Index n, const RngSeed& seed) const {
    return kind == SplitPlan::Kind::holdout ? make_holdout_split(n, train_fraction, seed) : make_kfold_split(n, k);
  }

  std::string label() const {
    return kind == SplitPlan::Kind::holdout ? "holdout:" + trimmed(train_fraction) : "kfold:" + std::to_string(k);
  }

  static SplitSpec parse(std::string_view text) {
    SplitSpec s;
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (head == "holdout") {
      s.kind = SplitPlan::Kind::holdout;
      if (!arg.empty()) s.train_fraction = detail::to_double(arg, "holdout fraction");
      if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0,1)");
    } else if (head == "kfold") {
      s.kind = SplitPlan::Kind::kfold;
      if (!arg.empty()) s.k = detail::to_int(arg, "fold count");
      if (s.k < 2) throw ConfigError("fold count must be >= 2");
    } else {
      throw ConfigError("unknown split '" + std::string(text) + "' (expected holdout:F or kfold:K)");
    }
    return s;
  }

 private:
  static std::string trimmed(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

struct TwoClassTest {
  std::string name = "clt";
  LearnerSpec tested;
  LearnerSpec comparator;
  SplitSpec split;
  TestSettings test;
  std::optional<LossFn> loss;  // defaults to the task's natural loss
};

inline LossDiffTable replicate_table(const DgpSpec& dgp, const TwoClassTest& config, const RngSeed& replicate) {
  const Dataset data = dgp.draw(replicate);
  const SplitPlan plan = config.split.make(data.rows(), derive(replicate, StreamTag::split));
  const LossFn loss = config.loss.value_or(LossFn::default_for(data.task()));
  return loss_diff_table(config.tested.algorithm(), config.comparator.algorithm(), data, plan, loss,
                         derive(replicate, StreamTag::fit));
}

// Per-replicate rejection indicators; replicate i depends only on (seed, i).
inline std::vector<char> rejection_indicators(const DgpSpec& dgp, const TwoClassTest& config, Index n_sims,
                                              const RngSeed& seed, unsigned workers = default_workers()) {
  if (n_sims < 1) throw ConfigError("number of simulations must be >= 1");
  std::vector<char> rejected(static_cast<std::size_t>(n_sims), 0);
  parallel_for(n_sims, workers, [&](Index i) {
    const LossDiffTable table = replicate_table(dgp, config, replicate_seed(seed, i));
    rejected[static_cast<std::size_t>(i)] = run_test(table, config.test).reject ? 1 : 0;
  });
  return rejected;
}

inline RateEstimate estimate_rejection_rate(const DgpSpec& dgp, const TwoClassTest& config, Index n_sims,
                                            const RngSeed& seed, unsigned workers = default_workers()) {
  const auto rejected = rejection_indicators(dgp, config, n_sims, seed, workers);
  const auto hits = static_cast<Index>(std::count(rejected.begin(), rejected.end(), 1));
  return wilson(hits, n_sims);
}

// ---------------------------------------------------------------------------
// Oracle omega

struct OmegaCalibration {
  double omega = 0.0;
  std::vector<double> grid;
  std::vector<RateEstimate> rates;
};

inline std::vector<double> default_omega_grid() {
  std::vector<double> g(101);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 100.0;
  return g;
}

// Largest grid omega whose simulated rejection rate under the null stays
// below alpha; 0 if none does.
inline OmegaCalibration calibrate_omega_oracle(const DgpSpec& null_dgp, const TwoClassTest& config,
                                               std::vector<double> omega_grid, Index n_sims, double alpha,
                                               const RngSeed& seed, unsigned workers = default_workers()) {
  if (omega_grid.empty()) throw ConfigError("omega grid must be non-empty");
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    if (!(omega_grid[i] >= 0.0 && omega_grid[i] <= 1.0)) throw ConfigError("omega grid values must lie in [0,1]");
    if (i > 0 && !(omega_grid[i] > omega_grid[i - 1])) throw ConfigError("omega grid must be strictly ascending");
  }
  if (n_sims < 1) throw ConfigError("number of simulations must be >= 1");
  if (const auto truth = null_dgp.two_class_truth()) {
    if (std::find(truth->begin(), truth->end(), Index{0}) == truth->end()) {
      throw ConfigError("the calibration process must satisfy the null (tested class optimal)");
    }
  }
  TestSettings ui = config.test;
  ui.method = TestMethod::ui;
  ui.alpha = alpha;

  std::vector<std::vector<char>> rejected(omega_grid.size(), std::vector<char>(static_cast<std::size_t>(n_sims), 0));
  parallel_for(n_sims, workers, [&](Index i) {
    const LossDiffTable table = replicate_table(null_dgp, config, replicate_seed(seed, i));
    for (std::size_t g = 0; g < omega_grid.size(); ++g) {
      rejected[g][static_cast<std::size_t>(i)] = phi_ui(table, omega_grid[g], ui.alpha, ui.epsilon).reject ? 1 : 0;
    }
  });
  OmegaCalibration out;
  out.grid = std::move(omega_grid);
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    const auto hits = static_cast<Index>(std::count(rejected[g].begin(), rejected[g].end(), 1));
    out.rates.push_back(wilson(hits, n_sims));
    if (out.rates.back().rate < alpha) out.omega = out.grid[g];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Power curves

enum class SweepParam { gamma, noise, nu, n };

inline std::string_view to_string(SweepParam s) {
  switch (s) {
    case SweepParam::gamma: return "gamma";
    case SweepParam::noise: return "rho";
    case SweepParam::nu: return "nu";
    case SweepParam::n: return "n";
  }
  return "gamma";
}

inline DgpSpec with_sweep_value(DgpSpec dgp, SweepParam param, double value) {
  switch (param) {
    case SweepParam::gamma: dgp.gamma = value; break;
    case SweepParam::noise: dgp.noise = value; break;
    case SweepParam::nu: dgp.nu = value; break;
    case SweepParam::n: dgp.n = static_cast<Index>(value); break;
  }
  return dgp;
}

struct PowerRow {
  std::string parameter;
  double grid_value = 0.0;
  std::string method;
  RateEstimate estimate;
};

// Rejection rate per (grid value, configuration). Replicate seeds are shared
// across grid points and configurations (common random numbers).
inline std::vector<PowerRow> run_power_curve(const DgpSpec& base, SweepParam param, const std::vector<double>& grid,
                                             const std::vector<TwoClassTest>& configs, Index n_sims,
                                             const RngSeed& seed, unsigned workers = default_workers()) {
  if (grid.empty()) throw ConfigError("sweep grid must be non-empty");
  if (configs.empty()) throw ConfigError("at least one test configuration is required");
  std::vector<PowerRow> rows;
  for (double v : grid) {
    const DgpSpec dgp = with_sweep_value(base, param, v);
    for (const auto& config : configs) {
      rows.push_back({std::string(to_string(param)), v, config.name,
                      estimate_rejection_rate(dgp, config, n_sims, seed, workers)});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Feature selection over all non-empty subsets of the six features

inline constexpr unsigned kOptimalFeatureMask = 0b010101;  // features 1, 3, 5

inline Index feature_mask_class(unsigned mask) { return static_cast<Index>(mask) - 1; }

inline IndexList mask_features(unsigned mask) {
  IndexList f;
  for (Index j = 0; j < kFeatureSelectionDim; ++j) {
    if (mask & (1U << j)) f.push_back(j);
  }
  return f;
}

// Class r holds the models using the features in bitmask r + 1; the last
// class uses all six and serves as every other class's comparator.
inline std::vector<ClassSpec> feature_selection_classes(const LearnerSpec& learner) {
  std::vector<ClassSpec> classes;
  const unsigned full = (1U << kFeatureSelectionDim) - 1;
  for (unsigned mask = 1; mask <= full; ++mask) {
    LearnerSpec spec = learner;
    spec.features = mask_features(mask);
    std::string name = "{";
    for (auto f : *spec.features) name += (name.size() > 1 ? "," : "") + std::to_string(f + 1);
    name += "}";
    classes.push_back({std::move(name), spec.algorithm(), {}, std::nullopt});
  }
  return classes;
}

// Classes whose feature set contains {1, 3, 5}: the risk-optimal classes for
// correctly specified linear models.
inline std::vector<Index> feature_selection_truth() {
  std::vector<Index> truth;
  const unsigned full = (1U << kFeatureSelectionDim) - 1;
  for (unsigned mask = 1; mask <= full; ++mask) {
    if ((mask & kOptimalFeatureMask) == kOptimalFeatureMask) truth.push_back(feature_mask_class(mask));
  }
  return truth;
}

struct FeatureSelectionConfig {
  Index n = 200;
  std::vector<double> nu_grid{4.0};
  double rho = 0.35;
  LearnerSpec learner;  // features overwritten per class
  SplitSpec split;
  TestSettings test{TestMethod::clt, 0.1, 1e-6, 0.0, MarginScale::standardized, std::nullopt};
  std::vector<Regime> regimes{Regime::pointwise, Regime::bonferroni_uniform};
  Index n_sims = 300;
};

struct FeatureSelectionRow {
  double nu = 0.0;
  Regime regime = Regime::pointwise;
  RateEstimate miss_coverage;  // r* not retained
  double mean_size = 0.0;
  double size_ci_low = 0.0;
  double size_ci_high = 0.0;
  RateEstimate uniform_coverage;  // all optimal classes retained
};

inline std::vector<FeatureSelectionRow> run_feature_selection_experiment(const FeatureSelectionConfig& config,
                                                                         const RngSeed& seed,
                                                                         unsigned workers = default_workers()) {
  if (config.nu_grid.empty()) throw ConfigError("nu grid must be non-empty");
  if (config.regimes.empty()) throw ConfigError("at least one regime is required");
  if (config.n_sims < 1) throw ConfigError("number of simulations must be >= 1");
  const auto classes = feature_selection_classes(config.learner);
  const auto truth = feature_selection_truth();
  const Index r_star = feature_mask_class(kOptimalFeatureMask);
  const auto comparators = detail::resolve_comparators(classes);
  const auto names = detail::class_names(classes);
  const LossFn loss = LossFn::squared_error();

  std::vector<FeatureSelectionRow> rows;
  for (double nu : config.nu_grid) {
    const std::size_t nr = config.regimes.size();
    std::vector<std::vector<SetMetrics>> metrics(nr, std::vector<SetMetrics>(static_cast<std::size_t>(config.n_sims)));
    parallel_for(config.n_sims, workers, [&](Index i) {
      const RngSeed rep = replicate_seed(seed, i);
      const Dataset data = gen_feature_selection(config.n, nu, config.rho, derive(rep, StreamTag::dataset));
      const SplitPlan plan = config.split.make(data.rows(), derive(rep, StreamTag::split));
      const auto tables = selective_tables(classes, data, plan, loss, derive(rep, StreamTag::fit));
      for (std::size_t g = 0; g < nr; ++g) {
        McsSettings s{config.test, Strategy::selective, config.regimes[g]};
        const auto result = confidence_set_from_tables(tables, names, comparators, s);
        metrics[g][static_cast<std::size_t>(i)] = set_metrics(result, truth, r_star);
      }
    });
    for (std::size_t g = 0; g < nr; ++g) {
      Index missed = 0;
      Index covered = 0;
      double sum = 0.0;
      double sum_sq = 0.0;
      for (const auto& m : metrics[g]) {
        missed += *m.designated_covered ? 0 : 1;
        covered += m.uniform_coverage ? 1 : 0;
        sum += static_cast<double>(m.size);
        sum_sq += static_cast<double>(m.size) * static_cast<double>(m.size);
      }
      const auto s = static_cast<double>(config.n_sims);
      const double mean = sum / s;
      const double var = s > 1 ? std::max(0.0, (sum_sq - s * mean * mean) / (s - 1.0)) : 0.0;
      const double half = kZ95 * std::sqrt(var / s);
      FeatureSelectionRow row;
      row.nu = nu;
      row.regime = config.regimes[g];
      row.miss_coverage = wilson(missed, config.n_sims);
      row.mean_size = mean;
      row.size_ci_low = mean - half;
      row.size_ci_high = mean + half;
      row.uniform_coverage = wilson(covered, config.n_sims);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mcs
