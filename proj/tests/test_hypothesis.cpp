#include <gtest/gtest.h>

#include <cmath>

#include "mcs/dgp.hpp"
#include "mcs/hypothesis.hpp"
#include "mcs/learners.hpp"

using namespace mcs;

namespace {

LossDiffTable table_of(std::vector<std::vector<double>> rows) {
  LossDiffTable t;
  t.rows = std::move(rows);
  return t;
}

}  // namespace

TEST(PhiClt, HandExample) {
  const auto o = phi_clt(table_of({{2, 0, 2, 0}}), 0.05, 0.0);
  EXPECT_DOUBLE_EQ(o.statistic, 1.0);
  EXPECT_NEAR(o.threshold, 0.5 * std::sqrt(4.0 / 3.0) * 1.6448536269514722, 1e-12);
  EXPECT_NEAR(o.threshold, 0.9496566842979647, 1e-12);
  EXPECT_TRUE(o.reject);
  EXPECT_TRUE(o.consistent());
  EXPECT_EQ(o.method, "clt");
}

TEST(PhiClt, NonPositiveMeanNeverRejects) {
  EXPECT_FALSE(phi_clt(table_of({{1, -1, 0.5, -0.5}}), 0.05, 0.0).reject);
  EXPECT_FALSE(phi_clt(table_of({{-1, -3, 0.5, -0.5}}), 0.2, 1e-6).reject);
}

TEST(PhiClt, DegenerateVariance) {
  const auto pos = phi_clt(table_of({{0.3, 0.3, 0.3}, {0.3, 0.3}}), 0.05, 1e-6);
  EXPECT_EQ(pos.threshold, 0.0);
  EXPECT_TRUE(pos.reject);
  EXPECT_EQ(pos.details.at("degenerate"), 1.0);
  EXPECT_FALSE(phi_clt(table_of({{0, 0, 0}}), 0.05, 1e-6).reject);
  EXPECT_FALSE(phi_clt(table_of({{-2, -2}}), 0.05, 1e-6).reject);
}

TEST(PhiClt, RawMargin) {
  const auto t = table_of({{2, 0, 2, 0}});
  const auto o = phi_clt(t, 0.05, 0.2, MarginScale::raw);
  EXPECT_NEAR(o.threshold, 0.9496566842979647 + 0.2, 1e-12);
  EXPECT_FALSE(o.reject);
  const auto s = phi_clt(t, 0.05, 0.2);
  EXPECT_NEAR(s.threshold, 0.5 * std::sqrt(4.0 / 3.0) * (1.6448536269514722 + 0.2), 1e-12);
}

TEST(PhiClt, ValidatesArguments) {
  const auto t = table_of({{1, 2}});
  EXPECT_THROW(phi_clt(t, 0.0, 0.0), ConfigError);
  EXPECT_THROW(phi_clt(t, 1.0, 0.0), ConfigError);
  EXPECT_THROW(phi_clt(t, 0.05, -1.0), ConfigError);
  EXPECT_THROW(phi_clt(table_of({{1}}), 0.05, 0.0), DataError);
}

TEST(PhiClt, NullRejectionFrequency) {
  Rng rng({99, 0});
  const int sims = 2000;
  int hits = 0;
  for (int s = 0; s < sims; ++s) {
    std::vector<double> row(400);
    for (auto& v : row) v = rng.normal();
    hits += phi_clt(table_of({row}), 0.05, 0.0).reject ? 1 : 0;
  }
  const double rate = hits / static_cast<double>(sims);
  EXPECT_NEAR(rate, 0.05, 3 * std::sqrt(0.05 * 0.95 / sims));
}

TEST(PhiUi, HandExample) {
  const auto o = phi_ui(table_of({{10, 10, 10}}), 0.1, 0.05, 0.0);
  EXPECT_NEAR(o.statistic, 20.085536923187668, 1e-12);
  EXPECT_DOUBLE_EQ(o.threshold, 20.0);
  EXPECT_TRUE(o.reject);
  ASSERT_TRUE(o.omega.has_value());
  EXPECT_EQ(*o.omega, 0.1);
}

TEST(PhiUi, OmegaZeroNeverRejects) {
  const auto o = phi_ui(table_of({{100, 100}}), 0.0, 0.9, 1e-6);
  EXPECT_DOUBLE_EQ(o.statistic, 1.0 - 1e-6);
  EXPECT_FALSE(o.reject);
}

TEST(PhiUi, NonPositiveDifferencesFail) {
  const auto o = phi_ui(table_of({{-1, -2}, {0, -0.5}}), 0.8, 0.5, 0.0);
  EXPECT_LE(o.statistic, 1.0);
  EXPECT_FALSE(o.reject);
}

TEST(PhiUi, OverflowRejects) {
  const auto o = phi_ui(table_of({{1e6}}), 1.0, 0.05, 0.0);
  EXPECT_TRUE(std::isinf(o.statistic));
  EXPECT_TRUE(o.reject);
  EXPECT_NEAR(o.details.at("log_e_value"), 1e6, 1e-6);
}

TEST(PhiCi, HoeffdingValue) {
  const double delta = hoeffding_delta(100, 2.0, 0.05);
  EXPECT_NEAR(delta, 2.0 * std::sqrt(100.0 * std::log(20.0) / 2.0), 1e-12);
  EXPECT_NEAR(delta, 24.477468306808163, 1e-9);
}

TEST(PhiCi, ZeroTableFails) {
  const auto o = phi_ci(table_of({std::vector<double>(100, 0.0)}), {-1, 1}, 0.05, 0.0);
  EXPECT_EQ(o.statistic, 0.0);
  EXPECT_GT(o.threshold, 0.0);
  EXPECT_FALSE(o.reject);
}

TEST(PhiCi, ThresholdAndWidening) {
  const auto t = table_of({std::vector<double>(100, 0.3)});
  const auto o = phi_ci(t, {-1, 1}, 0.05, 0.01);
  EXPECT_NEAR(o.threshold, 24.477468306808163 + 1.0, 1e-9);
  EXPECT_TRUE(o.reject);
  EXPECT_FALSE(phi_ci(t, {-2, 2}, 0.05, 0.01).reject);
  for (double w = 1.0; w < 4.0; w += 0.25) {
    EXPECT_LE(phi_ci(t, {-w, w}, 0.05, 0.0).threshold, phi_ci(t, {-w - 0.25, w + 0.25}, 0.05, 0.0).threshold);
  }
}

TEST(PhiCi, Errors) {
  EXPECT_THROW(phi_ci(table_of({{0.5, 2.0}}), {-1, 1}, 0.05, 0.0), DataError);
  EXPECT_THROW(phi_ci(table_of({{0.5}, {0.2}}), {-1, 1}, 0.05, 0.0), ConfigError);
  EXPECT_THROW(phi_ci(table_of({{0.5}}), {1, -1}, 0.05, 0.0), ConfigError);
}

namespace {

Dataset nested_data(Index n, double extra_coef, std::uint64_t seed, double scale = 1.0) {
  Rng rng({seed, 0});
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
    y(i) = scale * (1.0 + 2.0 * x(i, 0) - x(i, 1) + extra_coef * x(i, 2) + rng.normal());
  }
  return Dataset(x, y, Task::regression);
}

}  // namespace

TEST(Lrt, IdentityNesting) {
  const auto d = nested_data(100, 0.0, 1);
  const auto o = lrt_nested_gaussian({0, 1}, {0, 1}, d, 0.05);
  EXPECT_EQ(o.statistic, 0.0);
  EXPECT_FALSE(o.reject);
}

TEST(Lrt, ScaleInvariant) {
  const auto a = lrt_nested_gaussian({0, 1}, {0, 1, 2}, nested_data(80, 0.3, 2), 0.05);
  const auto b = lrt_nested_gaussian({0, 1}, {0, 1, 2}, nested_data(80, 0.3, 2, 7.5), 0.05);
  EXPECT_NEAR(a.statistic, b.statistic, 1e-9);
  EXPECT_NEAR(a.threshold, 3.841458820694124, 1e-8);
}

TEST(Lrt, NullCalibration) {
  const int sims = 1000;
  int hits = 0;
  for (int s = 0; s < sims; ++s) {
    hits += lrt_nested_gaussian({0, 1}, {0, 1, 2}, nested_data(500, 0.0, 1000 + static_cast<std::uint64_t>(s)), 0.05)
                    .reject
                ? 1
                : 0;
  }
  EXPECT_NEAR(hits / static_cast<double>(sims), 0.05, 3 * std::sqrt(0.05 * 0.95 / sims));
}

TEST(Lrt, DetectsSignalAndValidates) {
  EXPECT_TRUE(lrt_nested_gaussian({0, 1}, {0, 1, 2}, nested_data(500, 0.5, 3), 0.05).reject);
  EXPECT_THROW(lrt_nested_gaussian({0, 2}, {0, 1}, nested_data(50, 0.0, 4), 0.05), ConfigError);
}

namespace {

struct InfSetup {
  Dataset data;
  SplitPlan plan;
  FitAlgorithm comparator;
};

InfSetup inf_setup() {
  const auto d = gen_mars(200, 0.0, {5, 5});
  return {d, make_holdout_split(200, 0.5, {6, 6}), parse_learner("ols").algorithm()};
}

}  // namespace

TEST(PhiCltInf, SingletonMatchesPhiClt) {
  const auto s = inf_setup();
  const Model m = Model::make<ConstantModel>(7.0);
  const std::vector<Model> one{m};
  const auto inf = phi_clt_inf(one, s.comparator, s.data, s.plan, LossFn::squared_error(), 0.05, 1e-6, {1, 1});
  const auto table =
      loss_diff_table(constant_algorithm(m), s.comparator, s.data, s.plan, LossFn::squared_error(), {1, 1});
  const auto direct = phi_clt(table, 0.05, 1e-6);
  EXPECT_DOUBLE_EQ(inf.statistic, direct.statistic);
  EXPECT_DOUBLE_EQ(inf.threshold, direct.threshold);
  EXPECT_EQ(inf.reject, direct.reject);
}

TEST(PhiCltInf, MonotoneAndDuplicateInvariant) {
  const auto s = inf_setup();
  const auto sq = LossFn::squared_error();
  std::vector<Model> c{Model::make<ConstantModel>(9.0)};
  double last = phi_clt_inf(c, s.comparator, s.data, s.plan, sq, 0.05, 0.0, {1, 1}).statistic;
  for (double v : {5.0, 12.0, 7.5, 3.0}) {
    c.push_back(Model::make<ConstantModel>(v));
    const double now = phi_clt_inf(c, s.comparator, s.data, s.plan, sq, 0.05, 0.0, {1, 1}).statistic;
    EXPECT_LE(now, last);
    last = now;
  }
  const Model m = Model::make<ConstantModel>(8.0);
  const auto single = phi_clt_inf(std::vector<Model>{m}, s.comparator, s.data, s.plan, sq, 0.05, 0.0, {1, 1});
  const auto twin = phi_clt_inf(std::vector<Model>{m, m}, s.comparator, s.data, s.plan, sq, 0.05, 0.0, {1, 1});
  EXPECT_EQ(single.statistic, twin.statistic);
  EXPECT_EQ(single.threshold, twin.threshold);
  EXPECT_EQ(single.reject, twin.reject);
}

TEST(PhiCltInf, Errors) {
  const auto s = inf_setup();
  const std::vector<Model> one{Model::make<ConstantModel>(1.0)};
  EXPECT_THROW(phi_clt_inf(one, s.comparator, s.data, make_kfold_split(200, 5), LossFn::squared_error(), 0.05, 0.0, {}),
               ConfigError);
  EXPECT_THROW(phi_clt_inf(std::vector<Model>{}, s.comparator, s.data, s.plan, LossFn::squared_error(), 0.05, 0.0, {}),
               ConfigError);
}

TEST(RunTest, Dispatch) {
  const auto t = table_of({{0.5, 0.1, 0.2, 0.4}});
  TestSettings s;
  EXPECT_EQ(run_test(t, s).method, "clt");
  s.method = TestMethod::ui;
  s.omega = 0.5;
  EXPECT_EQ(run_test(t, s).method, "ui");
  s.method = TestMethod::ci;
  EXPECT_THROW(run_test(t, s), ConfigError);
  s.ci_range = LossRange{-1, 1};
  EXPECT_EQ(run_test(t, s).method, "ci");
  EXPECT_THROW(parse_method("bogus"), ConfigError);
}
