#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcs/mcs.hpp"

namespace {

using mcs::ConfigError;
using mcs::Json;

struct Flags {
  std::string data;
  std::string target = "y";
  std::string task = "regression";
  std::vector<std::string> categorical;
  std::string split;
  std::string method = "clt";
  std::string strategy = "selective";
  bool bonferroni = false;
  double alpha = 0.05;
  double epsilon = 1e-6;
  double omega = 0.0;
  std::string margin = "standardized";
  std::string ci_bound;
  std::string loss;
  std::uint64_t seed = 1;
  long sims = 300;
  unsigned workers = mcs::default_workers();
  std::string out;
  std::string json;
  std::string dump_table;
  std::vector<std::string> classes;

  // simulation grids and parameters
  std::string family;
  std::vector<double> gamma;
  std::vector<double> rho;
  std::vector<double> nu;
  std::vector<double> n;
  double corr = 0.35;
  double p = 0.4;
  std::string dgp = "bernoulli";
  std::vector<double> omega_grid;
  std::string noise_scale = "variance";

  // learner hyperparameters shared by every class
  int trees = 100;
  int max_depth = -1;
  int min_leaf = 1;
  double feature_fraction = -1.0;
  double ridge = 1e-6;
  bool intercept = true;
  bool bootstrap = true;
};

// Collects every configuration problem so they can be reported together.
class Issues {
 public:
  template <class F>
  auto attempt(F&& f, decltype(f()) fallback) -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError& e) {
      list_.emplace_back(e.what());
      return fallback;
    }
  }

  void require(bool ok, const std::string& message) {
    if (!ok) list_.push_back(message);
  }

  void raise() const {
    if (list_.empty()) return;
    std::string msg = list_.size() == 1 ? "invalid configuration: " : "invalid configuration (" +
                                                                         std::to_string(list_.size()) + " problems):";
    if (list_.size() == 1) {
      msg += list_.front();
    } else {
      for (const auto& m : list_) msg += "\n  - " + m;
    }
    throw ConfigError(msg);
  }

 private:
  std::vector<std::string> list_;
};

struct Context {
  Flags f;
  CLI::App* app = nullptr;

  bool given(const std::string& name) const { return app->get_option(name)->count() > 0; }

  // A list flag written with no values parses as a single empty string.
  bool given_empty(const std::string& name) const {
    const auto& r = app->get_option(name)->results();
    return std::all_of(r.begin(), r.end(), [](const std::string& s) { return s.empty(); });
  }
};

mcs::LearnerDefaults learner_defaults(const Context& c) {
  mcs::LearnerDefaults d;
  if (c.given("--trees")) d.trees = c.f.trees;
  if (c.given("--max-depth")) d.max_depth = c.f.max_depth;
  if (c.given("--min-leaf")) d.min_leaf = c.f.min_leaf;
  if (c.given("--feature-fraction")) d.feature_fraction = c.f.feature_fraction;
  if (c.given("--ridge")) d.ridge = c.f.ridge;
  if (c.given("--intercept")) d.intercept = c.f.intercept;
  if (c.given("--bootstrap")) d.bootstrap = c.f.bootstrap;
  return d;
}

std::vector<mcs::LearnerSpec> resolve_learners(const Context& c, Issues& issues,
                                               const std::vector<std::string>& defaults) {
  const auto& specs = c.f.classes.empty() ? defaults : c.f.classes;
  std::vector<mcs::LearnerSpec> out;
  const auto d = learner_defaults(c);
  for (const auto& s : specs) {
    out.push_back(issues.attempt([&] { return mcs::parse_learner(s, d); }, mcs::LearnerSpec{}));
  }
  issues.require(d.trees.value_or(1) >= 1, "trees must be >= 1");
  issues.require(d.min_leaf.value_or(1) >= 1, "min_leaf must be >= 1");
  issues.require(!d.ridge || *d.ridge >= 0.0, "ridge must be >= 0");
  issues.require(!d.feature_fraction || *d.feature_fraction <= 1.0, "feature_fraction must be <= 1");
  return out;
}

mcs::TestSettings resolve_test(const Context& c, Issues& issues, double default_alpha) {
  mcs::TestSettings t;
  t.method = issues.attempt([&] { return mcs::parse_method(c.f.method); }, mcs::TestMethod::clt);
  t.alpha = c.given("--alpha") ? c.f.alpha : default_alpha;
  issues.require(t.alpha > 0.0 && t.alpha < 1.0, "alpha must lie in (0,1)");
  t.epsilon = c.f.epsilon;
  issues.require(t.epsilon >= 0.0 && std::isfinite(t.epsilon), "epsilon must be finite and >= 0");
  t.omega = c.f.omega;
  issues.require(t.omega >= 0.0 && std::isfinite(t.omega), "omega must be finite and >= 0");
  if (c.f.margin == "raw") {
    t.margin = mcs::MarginScale::raw;
  } else {
    issues.require(c.f.margin == "standardized", "margin must be standardized|raw");
  }
  if (!c.f.ci_bound.empty()) {
    const auto parts = mcs::detail::split(c.f.ci_bound, ',');
    if (parts.size() != 2) {
      issues.require(false, "ci-bound must be 'low,high'");
    } else {
      const double lo = issues.attempt([&] { return mcs::detail::to_double(parts[0], "ci-bound"); }, 0.0);
      const double hi = issues.attempt([&] { return mcs::detail::to_double(parts[1], "ci-bound"); }, 1.0);
      issues.require(lo < hi, "ci-bound needs low < high");
      t.ci_range = mcs::LossRange{lo, hi};
    }
  }
  if (t.method == mcs::TestMethod::ci) issues.require(t.ci_range.has_value(), "method ci needs --ci-bound low,high");
  return t;
}

mcs::SplitSpec resolve_split(const Context& c, Issues& issues, const std::string& fallback) {
  const std::string text = c.f.split.empty() ? fallback : c.f.split;
  return issues.attempt([&] { return mcs::SplitSpec::parse(text); }, mcs::SplitSpec{});
}

std::optional<mcs::Task> resolve_task(const Context& c, Issues& issues) {
  return issues.attempt([&] { return std::optional<mcs::Task>(mcs::parse_task(c.f.task)); }, std::nullopt);
}

std::optional<mcs::LossFn> resolve_loss(const Context& c, Issues& issues) {
  if (c.f.loss.empty()) return std::nullopt;
  return issues.attempt([&] { return std::optional<mcs::LossFn>(mcs::LossFn::parse(c.f.loss)); }, std::nullopt);
}

void common_checks(const Context& c, Issues& issues) {
  issues.require(c.f.sims >= 1, "sims must be >= 1");
  issues.require(c.f.workers >= 1, "workers must be >= 1");
}

mcs::Dataset load_data(const Context& c, mcs::Task task) {
  mcs::ColumnRef target = c.f.target;
  if (!c.f.target.empty() &&
      std::all_of(c.f.target.begin(), c.f.target.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
    target = static_cast<mcs::Index>(std::stoll(c.f.target));
  }
  mcs::CsvOptions opts;
  opts.categorical = c.f.categorical;
  return mcs::load_csv(c.f.data, target, task, opts);
}

Json settings_json(const mcs::TestSettings& t) {
  Json j;
  j["method"] = std::string(mcs::to_string(t.method));
  j["alpha"] = t.alpha;
  j["epsilon"] = t.epsilon;
  j["omega"] = t.omega;
  j["margin"] = std::string(mcs::to_string(t.margin));
  j["ci_bound"] = t.ci_range ? Json::array({t.ci_range->low, t.ci_range->high}) : Json(nullptr);
  return j;
}

Json learner_json(const std::vector<mcs::LearnerSpec>& ls) {
  Json arr = Json::array();
  for (const auto& l : ls) arr.push_back(l.label());
  return arr;
}

Json data_json(const mcs::Dataset& d, const std::string& source) {
  return Json{{"source", source}, {"n", d.rows()}, {"p", d.cols()}, {"task", std::string(mcs::to_string(d.task()))}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mcs::DataError("cannot write '" + path + "'");
  out << text;
}

void emit_json(const Context& c, const Json& report) {
  const std::string text = report.dump(2) + "\n";
  if (c.f.out.empty()) {
    std::cout << text;
  } else {
    write_text(c.f.out, text);
  }
}

// ---------------------------------------------------------------------------

int cmd_test(Context& c) {
  Issues issues;
  const auto task = resolve_task(c, issues);
  const auto learners = resolve_learners(c, issues, {});
  issues.require(learners.size() == 2, "test needs exactly two classes (--classes tested,comparator)");
  const auto split = resolve_split(c, issues, "kfold:10");
  const auto test = resolve_test(c, issues, 0.05);
  const auto loss = resolve_loss(c, issues);
  issues.require(!c.f.data.empty(), "test needs --data");
  common_checks(c, issues);
  issues.raise();

  const mcs::Dataset data = load_data(c, *task);
  const mcs::LossFn lf = loss.value_or(mcs::LossFn::default_for(data.task()));
  const mcs::RngSeed seed{c.f.seed, 0};
  const mcs::SplitPlan plan = split.make(data.rows(), mcs::derive(seed, mcs::StreamTag::split));
  const auto table = mcs::loss_diff_table(learners[0].algorithm(), learners[1].algorithm(), data, plan, lf,
                                          mcs::derive(seed, mcs::StreamTag::fit));
  const auto outcome = mcs::run_test(table, test);
  if (!c.f.dump_table.empty()) write_text(c.f.dump_table, mcs::to_json(table).dump(2) + "\n");

  Json report;
  report["command"] = "test";
  report["config"] = {{"seed", c.f.seed},
                      {"split", split.label()},
                      {"loss", std::string(lf.name())},
                      {"test", settings_json(test)},
                      {"classes", learner_json(learners)}};
  report["data"] = data_json(data, c.f.data);
  report["tested"] = table.tested;
  report["comparator"] = table.comparator;
  report["plan_digest"] = mcs::hex_digest(plan.digest());
  report["outcome"] = mcs::to_json(outcome);
  emit_json(c, report);
  return 0;
}

int cmd_mcs(Context& c) {
  Issues issues;
  const auto task = resolve_task(c, issues);
  const auto learners = resolve_learners(c, issues, {});
  issues.require(learners.size() >= 2, "mcs needs at least two classes (--classes a,b,...)");
  const auto split = resolve_split(c, issues, "kfold:10");
  const auto test = resolve_test(c, issues, 0.05);
  const auto loss = resolve_loss(c, issues);
  const auto strategy = issues.attempt([&] { return mcs::parse_strategy(c.f.strategy); }, mcs::Strategy::selective);
  if (strategy == mcs::Strategy::uniform) {
    for (std::size_t r = 0; r + 1 < learners.size(); ++r) {
      issues.require(learners[r].enumerable(), "class " + std::to_string(r) + " (" + c.f.classes[r] +
                                                   ") cannot be enumerated, so the uniform strategy is "
                                                   "unavailable; use --strategy selective instead");
    }
  }
  issues.require(!c.f.data.empty(), "mcs needs --data");
  common_checks(c, issues);
  issues.raise();

  const mcs::Dataset data = load_data(c, *task);
  const mcs::LossFn lf = loss.value_or(mcs::LossFn::default_for(data.task()));
  const mcs::RngSeed seed{c.f.seed, 0};
  const mcs::SplitPlan plan = split.make(data.rows(), mcs::derive(seed, mcs::StreamTag::split));
  std::vector<mcs::ClassSpec> classes;
  for (std::size_t r = 0; r < learners.size(); ++r) {
    mcs::ClassSpec spec{c.f.classes[r], learners[r].algorithm(), {}, std::nullopt};
    if (learners[r].enumerable()) spec.candidates.push_back(mcs::Model::make<mcs::ConstantModel>(learners[r].constant));
    classes.push_back(std::move(spec));
  }
  mcs::McsSettings settings{test, strategy,
                            c.f.bonferroni ? mcs::Regime::bonferroni_uniform : mcs::Regime::pointwise};
  const auto result =
      mcs::build_confidence_set(classes, data, plan, lf, settings, mcs::derive(seed, mcs::StreamTag::fit));

  std::cout << mcs::render_table(result);
  Json report;
  report["command"] = "mcs";
  report["config"] = {{"seed", c.f.seed},
                      {"split", split.label()},
                      {"loss", std::string(lf.name())},
                      {"strategy", std::string(mcs::to_string(strategy))},
                      {"regime", std::string(mcs::to_string(settings.regime))},
                      {"test", settings_json(test)},
                      {"classes", learner_json(learners)}};
  report["data"] = data_json(data, c.f.data);
  report["plan_digest"] = mcs::hex_digest(plan.digest());
  report["result"] = mcs::to_json(result);
  if (c.f.out.empty()) std::cout << '\n';
  emit_json(c, report);
  return 0;
}

std::vector<double> grid_or(const Context& c, Issues& issues, const std::string& flag, const std::vector<double>& v,
                            std::vector<double> fallback) {
  if (!c.given(flag)) return fallback;
  issues.require(!v.empty() && !c.given_empty(flag), "sweep grid " + flag + " is empty");
  return v;
}

double single_or(const Context& c, Issues& issues, const std::string& flag, const std::vector<double>& v,
                 double fallback) {
  if (!c.given(flag)) return fallback;
  issues.require(v.size() == 1 && !c.given_empty(flag), flag + " takes a single value here");
  return v.empty() ? fallback : v.front();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void print_rate_line(const std::string& label, const mcs::RateEstimate& r) {
  std::cout << label << "  rate=" << fmt(r.rate) << "  95% CI [" << fmt(r.ci_low) << ", " << fmt(r.ci_high)
            << "]  (" << r.successes << "/" << r.trials << ")\n";
}

int cmd_simulate(Context& c) {
  Issues issues;
  const std::string& family = c.f.family;
  issues.require(family == "mars" || family == "feature-selection" || family == "noise",
                 "unknown simulation '" + family + "' (expected mars|feature-selection|noise)");
  const auto split = resolve_split(c, issues, "kfold:10");
  const auto test = resolve_test(c, issues, family == "feature-selection" ? 0.1 : 0.05);
  const auto loss = resolve_loss(c, issues);
  const auto task = resolve_task(c, issues);
  common_checks(c, issues);
  const auto workers = c.f.workers;
  const mcs::RngSeed seed{c.f.seed, 0};

  std::vector<std::string> methods;
  for (const auto& m : mcs::detail::split(c.f.method, ',')) {
    const auto parsed = issues.attempt([&] { return mcs::parse_method(m); }, mcs::TestMethod::clt);
    if (parsed == mcs::TestMethod::ci) issues.require(test.ci_range.has_value(), "method ci needs --ci-bound low,high");
    methods.push_back(m);
  }

  if (family == "feature-selection") {
    mcs::FeatureSelectionConfig cfg;
    cfg.n = static_cast<mcs::Index>(single_or(c, issues, "--n", c.f.n, 200));
    cfg.nu_grid = grid_or(c, issues, "--nu", c.f.nu, {4.0});
    for (double v : cfg.nu_grid) issues.require(v > 0.0, "nu values must be > 0");
    cfg.rho = c.f.corr;
    issues.require(cfg.rho >= 0.0 && cfg.rho < 1.0, "corr must lie in [0,1)");
    const auto learners = resolve_learners(c, issues, {"ols"});
    issues.require(learners.size() == 1, "feature-selection takes one learner in --classes");
    issues.require(methods.size() == 1, "feature-selection runs a single method");
    issues.require(cfg.n >= 2, "n must be >= 2");
    issues.raise();
    cfg.learner = learners.front();
    cfg.split = split;
    cfg.test = test;
    cfg.n_sims = c.f.sims;
    const auto rows = mcs::run_feature_selection_experiment(cfg, seed, workers);
    for (const auto& r : rows) {
      std::cout << "nu=" << fmt(r.nu) << " " << mcs::to_string(r.regime) << "  miss_coverage=" << fmt(r.miss_coverage.rate)
                << " [" << fmt(r.miss_coverage.ci_low) << ", " << fmt(r.miss_coverage.ci_high) << "]"
                << "  mean_size=" << fmt(r.mean_size) << "  uniform_coverage=" << fmt(r.uniform_coverage.rate)
                << " [" << fmt(r.uniform_coverage.ci_low) << ", " << fmt(r.uniform_coverage.ci_high) << "]\n";
    }
    if (!c.f.out.empty()) {
      std::ostringstream csv;
      mcs::write_feature_selection_csv(csv, rows);
      write_text(c.f.out, csv.str());
    }
    if (!c.f.json.empty()) {
      Json report;
      report["command"] = "simulate";
      report["config"] = {{"family", family},
                          {"seed", c.f.seed},
                          {"n", cfg.n},
                          {"corr", cfg.rho},
                          {"learner", cfg.learner.label()},
                          {"split", split.label()},
                          {"sims", c.f.sims},
                          {"test", settings_json(test)}};
      report["rows"] = mcs::to_json(rows);
      write_text(c.f.json, report.dump(2) + "\n");
    }
    return 0;
  }

  mcs::DgpSpec base;
  mcs::SweepParam param = mcs::SweepParam::gamma;
  std::vector<double> grid;
  std::string source = "mars";
  if (family == "mars") {
    base.family = mcs::DgpSpec::Family::mars;
    base.n = static_cast<mcs::Index>(single_or(c, issues, "--n", c.f.n, 500));
    grid = grid_or(c, issues, "--gamma", c.f.gamma, {0, 1, 2, 3, 4, 5, 6});
    for (double v : grid) issues.require(v >= 0.0, "gamma values must be >= 0");
  } else {
    param = mcs::SweepParam::noise;
    grid = grid_or(c, issues, "--rho", c.f.rho, {0.0, 0.05, 0.1, 0.15, 0.2, 0.25});
    for (double v : grid) issues.require(v >= 0.0 && v <= 0.25, "rho values must lie in [0, 0.25]");
    if (c.f.noise_scale == "stddev") {
      base.noise_scale = mcs::NoiseScale::stddev;
    } else {
      issues.require(c.f.noise_scale == "variance", "noise-scale must be variance|stddev");
    }
    if (c.f.data.empty()) {
      base.family = mcs::DgpSpec::Family::mars;
      base.n = static_cast<mcs::Index>(single_or(c, issues, "--n", c.f.n, 500));
      base.gamma = single_or(c, issues, "--gamma", c.f.gamma, 6.0);
    } else {
      base.family = mcs::DgpSpec::Family::fixed;
      source = c.f.data;
    }
  }
  issues.require(base.family == mcs::DgpSpec::Family::fixed || base.n >= 2, "n must be >= 2");
  const bool classification = base.family == mcs::DgpSpec::Family::fixed && task == mcs::Task::classification;
  const auto learners = resolve_learners(c, issues,
                                         classification ? std::vector<std::string>{"logistic", "forest"}
                                         : base.family == mcs::DgpSpec::Family::mars
                                             ? std::vector<std::string>{"ols:intercept=false", "forest"}
                                                            : std::vector<std::string>{"ols", "forest"});
  issues.require(learners.size() == 2, "simulate " + family + " needs exactly two classes");
  issues.raise();

  if (base.family == mcs::DgpSpec::Family::fixed) base.data = std::make_shared<const mcs::Dataset>(load_data(c, *task));
  std::vector<mcs::TwoClassTest> configs;
  for (const auto& m : methods) {
    mcs::TwoClassTest t;
    t.name = m;
    t.tested = learners[0];
    t.comparator = learners[1];
    t.split = split;
    t.test = test;
    t.test.method = mcs::parse_method(m);
    t.loss = loss;
    configs.push_back(std::move(t));
  }
  const auto rows = mcs::run_power_curve(base, param, grid, configs, c.f.sims, seed, workers);
  for (const auto& r : rows) print_rate_line(r.parameter + "=" + fmt(r.grid_value) + " " + r.method, r.estimate);
  if (!c.f.out.empty()) {
    std::ostringstream csv;
    mcs::write_power_csv(csv, rows);
    write_text(c.f.out, csv.str());
  }
  if (!c.f.json.empty()) {
    Json report;
    report["command"] = "simulate";
    report["config"] = {{"family", family},
                        {"source", source},
                        {"seed", c.f.seed},
                        {"n", base.sample_size()},
                        {"gamma", base.gamma},
                        {"split", split.label()},
                        {"sims", c.f.sims},
                        {"classes", learner_json(learners)},
                        {"test", settings_json(test)}};
    report["rows"] = mcs::to_json(rows);
    write_text(c.f.json, report.dump(2) + "\n");
  }
  return 0;
}

int cmd_calibrate(Context& c) {
  Issues issues;
  mcs::DgpSpec dgp;
  std::vector<std::string> default_classes;
  if (c.f.dgp == "bernoulli") {
    dgp.family = mcs::DgpSpec::Family::bernoulli_null;
    dgp.p = c.f.p;
    issues.require(c.f.p >= 0.0 && c.f.p <= 0.5, "p must lie in [0, 0.5] so the tested class is optimal");
    default_classes = {"const:0", "const:1"};
  } else if (c.f.dgp == "mars") {
    dgp.family = mcs::DgpSpec::Family::mars;
    dgp.gamma = 0.0;
    default_classes = {"ols:intercept=false", "forest"};
  } else {
    issues.require(false, "unknown calibration process '" + c.f.dgp + "' (expected bernoulli|mars)");
  }
  dgp.n = static_cast<mcs::Index>(single_or(c, issues, "--n", c.f.n, 200));
  issues.require(dgp.n >= 2, "n must be >= 2");
  const auto learners = resolve_learners(c, issues, default_classes);
  issues.require(learners.size() == 2, "calibrate-omega needs exactly two classes");
  const auto split = resolve_split(c, issues, "holdout:0.5");
  const auto test = resolve_test(c, issues, 0.05);
  const auto loss = resolve_loss(c, issues);
  auto grid = c.given("--omega-grid") ? c.f.omega_grid : mcs::default_omega_grid();
  issues.require(!grid.empty(), "omega grid is empty");
  common_checks(c, issues);
  issues.raise();

  mcs::TwoClassTest cfg;
  cfg.name = "ui";
  cfg.tested = learners[0];
  cfg.comparator = learners[1];
  cfg.split = split;
  cfg.test = test;
  cfg.loss = loss;
  const auto cal =
      mcs::calibrate_omega_oracle(dgp, cfg, grid, c.f.sims, test.alpha, mcs::RngSeed{c.f.seed, 0}, c.f.workers);
  std::cout << "omega_or=" << fmt(cal.omega) << "\n";
  Json report;
  report["command"] = "calibrate-omega";
  report["config"] = {{"dgp", c.f.dgp},
                      {"n", dgp.n},
                      {"p", dgp.p},
                      {"seed", c.f.seed},
                      {"split", split.label()},
                      {"sims", c.f.sims},
                      {"classes", learner_json(learners)},
                      {"test", settings_json(test)}};
  report["omega"] = cal.omega;
  Json rates = Json::array();
  for (std::size_t g = 0; g < cal.grid.size(); ++g) {
    Json r = mcs::to_json(cal.rates[g]);
    r["omega"] = cal.grid[g];
    rates.push_back(std::move(r));
  }
  report["rates"] = std::move(rates);
  if (!c.f.out.empty()) write_text(c.f.out, report.dump(2) + "\n");
  if (!c.f.json.empty()) write_text(c.f.json, report.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--data", f.data, "CSV file with a header row");
  app.add_option("--target", f.target, "target column name or zero-based index")->capture_default_str();
  app.add_option("--task", f.task, "regression|classification")->capture_default_str();
  app.add_option("--categorical", f.categorical, "categorical columns to one-hot encode")->delimiter(',');
  app.add_option("--split", f.split, "holdout:F or kfold:K");
  app.add_option("--method", f.method, "clt|ui|ci (simulate accepts a comma list)")->capture_default_str();
  app.add_option("--strategy", f.strategy, "selective|uniform")->capture_default_str();
  app.add_flag("--bonferroni", f.bonferroni, "test every class at alpha/d");
  app.add_option("--alpha", f.alpha, "significance level");
  app.add_option("--epsilon", f.epsilon, "margin")->capture_default_str();
  app.add_option("--omega", f.omega, "tilt for the ui method")->capture_default_str();
  app.add_option("--margin", f.margin, "where epsilon enters clt: standardized|raw")->capture_default_str();
  app.add_option("--ci-bound", f.ci_bound, "loss-difference range 'low,high' for the ci method");
  app.add_option("--loss", f.loss, "squared_error|log_loss (default from task)");
  app.add_option("--seed", f.seed, "master seed")->capture_default_str();
  app.add_option("--sims", f.sims, "Monte Carlo replicates")->capture_default_str();
  app.add_option("--workers", f.workers, "worker threads")->capture_default_str();
  app.add_option("--out", f.out, "output path");
  app.add_option("--json", f.json, "JSON report path for simulate");
  app.add_option("--dump-table", f.dump_table, "write the loss-difference table as JSON");
  app.add_option("--classes", f.classes, "learner specs, comma separated (last is the reference)")->delimiter(',');
  app.add_option("--gamma", f.gamma, "MARS nonlinearity grid")->delimiter(',')->expected(0, -1);
  app.add_option("--rho", f.rho, "noise level grid")->delimiter(',')->expected(0, -1);
  app.add_option("--nu", f.nu, "signal-to-noise grid")->delimiter(',')->expected(0, -1);
  app.add_option("--n", f.n, "sample size")->delimiter(',')->expected(0, -1);
  app.add_option("--corr", f.corr, "feature-selection covariance decay")->capture_default_str();
  app.add_option("--p", f.p, "success probability of the bernoulli null")->capture_default_str();
  app.add_option("--dgp", f.dgp, "calibration process: bernoulli|mars")->capture_default_str();
  app.add_option("--omega-grid", f.omega_grid, "ascending omega values in [0,1]")->delimiter(',')->expected(0, -1);
  app.add_option("--noise-scale", f.noise_scale, "variance|stddev")->capture_default_str();
  app.add_option("--trees", f.trees, "forest size");
  app.add_option("--max-depth", f.max_depth, "tree depth limit (negative: none)");
  app.add_option("--min-leaf", f.min_leaf, "minimum leaf size");
  app.add_option("--feature-fraction", f.feature_fraction, "features tried per split");
  app.add_option("--ridge", f.ridge, "logistic ridge penalty");
  app.add_option("--intercept", f.intercept, "fit intercepts in linear learners");
  app.add_option("--bootstrap", f.bootstrap, "bootstrap rows per tree");
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  CLI::App app{"Model class selection: data-splitting tests and confidence sets of model classes"};
  app.set_config("--config", "", "flat key=value file; flags override its values");
  app.require_subcommand(1);
  app.fallthrough();
  add_common(app, ctx.f);
  ctx.app = &app;

  auto* test = app.add_subcommand("test", "test one class against a comparator");
  auto* mcs_cmd = app.add_subcommand("mcs", "confidence set over d >= 2 classes");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo studies: mars | feature-selection | noise");
  sim->add_option("family", ctx.f.family, "mars|feature-selection|noise")->required();
  auto* cal = app.add_subcommand("calibrate-omega", "oracle omega for the ui method");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mcs::exit_code(mcs::ErrorKind::config);
  }

  try {
    if (test->parsed()) return cmd_test(ctx);
    if (mcs_cmd->parsed()) return cmd_mcs(ctx);
    if (sim->parsed()) return cmd_simulate(ctx);
    if (cal->parsed()) return cmd_calibrate(ctx);
  } catch (const mcs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mcs::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mcs::exit_code(mcs::ErrorKind::numeric);
  }
  return 0;
}
