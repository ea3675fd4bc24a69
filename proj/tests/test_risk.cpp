#include <gtest/gtest.h>

#include <cmath>

#include "mcs/dgp.hpp"
#include "mcs/learners.hpp"
#include "mcs/risk.hpp"
#include "oracle.hpp"

using namespace mcs;

namespace {

LossDiffTable table_of(std::vector<std::vector<double>> rows) {
  LossDiffTable t;
  t.rows = std::move(rows);
  t.tested = "a";
  t.comparator = "b";
  t.loss = "squared_error";
  return t;
}

}  // namespace

TEST(Loss, SquaredAndLog) {
  const auto sq = LossFn::squared_error();
  EXPECT_DOUBLE_EQ(sq(3.0, 1.0), 4.0);
  EXPECT_EQ(sq(2.0, 2.0), 0.0);
  const auto ll = LossFn::log_loss();
  EXPECT_NEAR(ll(0.5, 1.0), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(ll(0.0, 1.0)));
  EXPECT_NEAR(ll(0.0, 1.0), -std::log(1e-15), 1e-9);
  EXPECT_TRUE(std::isfinite(ll(1.0, 0.0)));
  EXPECT_FALSE(ll.compatible_with(Task::regression));
  EXPECT_EQ(LossFn::default_for(Task::classification).name(), "log_loss");
  EXPECT_THROW(LossFn::parse("hinge"), ConfigError);
}

TEST(LossDiff, IdenticalAlgorithmsGiveZero) {
  const auto d = gen_mars(60, 2.0, {1, 1});
  const auto alg = parse_learner("forest:trees=5").algorithm();
  const auto t = loss_diff_table(alg, alg, d, make_kfold_split(60, 5), LossFn::squared_error(), {3, 3});
  ASSERT_EQ(t.k(), 5);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.size(), 12U);
    for (double v : r) EXPECT_EQ(v, 0.0);
  }
}

TEST(LossDiff, ConstantModelsHandValue) {
  const Dataset d(Eigen::MatrixXd::Zero(10, 1), Eigen::VectorXd::Zero(10), Task::regression);
  const auto one = constant_algorithm(Model::make<ConstantModel>(1.0));
  const auto zero = constant_algorithm(Model::make<ConstantModel>(0.0));
  const auto t = loss_diff_table(one, zero, d, make_kfold_split(10, 2), LossFn::squared_error(), {});
  for (const auto& r : t.rows) {
    for (double v : r) EXPECT_EQ(v, 1.0);
  }
}

TEST(LossDiff, Antisymmetry) {
  const auto d = gen_mars(80, 3.0, {2, 2});
  const auto a = parse_learner("ols").algorithm();
  const auto b = parse_learner("forest:trees=5").algorithm();
  const auto plan = make_kfold_split(80, 4);
  const auto ab = loss_diff_table(a, b, d, plan, LossFn::squared_error(), {4, 4});
  const auto ba = loss_diff_table(b, a, d, plan, LossFn::squared_error(), {4, 4});
  ASSERT_EQ(ab.rows.size(), ba.rows.size());
  for (std::size_t j = 0; j < ab.rows.size(); ++j) {
    for (std::size_t i = 0; i < ab.rows[j].size(); ++i) EXPECT_EQ(ab.rows[j][i], -ba.rows[j][i]);
  }
  EXPECT_EQ(mean_risk_diff(ab), -mean_risk_diff(ba));
  EXPECT_EQ(pooled_variance(ab), pooled_variance(ba));
}

TEST(LossDiff, ShapeFollowsPlan) {
  const auto d = gen_mars(11, 0.0, {2, 2});
  const auto a = parse_learner("const:1").algorithm();
  const auto b = parse_learner("const:2").algorithm();
  const auto t = loss_diff_table(a, b, d, make_kfold_split(11, 5), LossFn::squared_error(), {});
  EXPECT_EQ(t.rows[0].size(), 3U);
  EXPECT_EQ(t.rows[4].size(), 2U);
  EXPECT_EQ(t.size(), 11);
  EXPECT_DOUBLE_EQ(t.effective_test_size(), 11.0 / 5.0);
  EXPECT_EQ(t.plan_digest, make_kfold_split(11, 5).digest());
}

TEST(LossDiff, FitFailureCarriesSplitIndex) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(20);
  y.tail(4).setOnes();
  const Dataset d(Eigen::MatrixXd::Random(20, 1), y, Task::classification);
  const auto lg = parse_learner("logistic").algorithm();
  const auto c = parse_learner("const:0.5").algorithm();
  try {
    loss_diff_table(lg, c, d, make_kfold_split(20, 5), LossFn::log_loss(), {});
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("split 4"), std::string::npos) << e.what();
  }
}

TEST(MeanRiskDiff, HandValues) {
  EXPECT_EQ(mean_risk_diff(table_of({{0, 0, 0}})), 0.0);
  EXPECT_DOUBLE_EQ(mean_risk_diff(table_of({{2, 0, 2, 0}})), 1.0);
  EXPECT_DOUBLE_EQ(mean_risk_diff(table_of({{2, 0, 2, 0}}).negated()), -1.0);
  EXPECT_DOUBLE_EQ(mean_risk_diff(table_of({{1, 2, 3}, {4, 5}})), 3.0);
}

TEST(PooledVariance, HandValues) {
  EXPECT_EQ(pooled_variance(table_of({{3, 3, 3}})), 0.0);
  EXPECT_NEAR(pooled_variance(table_of({{2, 0, 2, 0}})), std::sqrt(4.0 / 3.0), 1e-15);
  EXPECT_NEAR(pooled_variance(table_of({{1, -1}, {1, -1}})), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(pooled_variance(table_of({{1, 2}, {3}})), DataError);
}

TEST(PooledVariance, UnequalFoldsWeighted) {
  // variances 1 (n=3) and 0.5 (n=2): (3*1 + 2*0.5)/5
  EXPECT_NEAR(pooled_variance(table_of({{1, 2, 3}, {4, 5}})), std::sqrt(4.0 / 5.0), 1e-15);
}

TEST(ExpRiskStat, HandValues) {
  const auto any = table_of({{5, -3, 2}, {1}});
  EXPECT_EQ(exp_risk_stat(any, 0.0).value, 1.0);
  const auto e3 = exp_risk_stat(table_of({{10, 10, 10}}), 0.1);
  EXPECT_NEAR(e3.value, 20.085536923187668, 1e-12);
  EXPECT_NEAR(e3.log_value, 3.0, 1e-15);
  EXPECT_EQ(exp_risk_stat(table_of({{1, -1}, {2, -2}}), 0.7).value, 1.0);
  EXPECT_THROW(exp_risk_stat(any, -0.1), ConfigError);
}

TEST(ExpRiskStat, LogSpaceSurvivesOverflow) {
  const auto big = exp_risk_stat(table_of({{1000, 1000}, {0}}), 1.0);
  EXPECT_TRUE(std::isinf(big.value));
  EXPECT_NEAR(big.log_value, 2000.0 - std::log(2.0), 1e-9);
  const auto ok = exp_risk_stat(table_of({{300}, {-300}}), 1.0);
  EXPECT_NEAR(std::exp(ok.log_value), ok.value, 1e-12 * ok.value);
}

TEST(RiskProperties, OracleAndMonotonicity) {
  Rng rng({77, 0});
  for (int trial = 0; trial < 300; ++trial) {
    const Index k = 1 + static_cast<Index>(rng.below(6));
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(k));
    const bool nonneg = trial % 3 == 0;
    for (auto& r : rows) {
      r.resize(2 + rng.below(30));
      for (auto& v : r) v = nonneg ? std::abs(rng.normal()) : rng.normal(0.2, 1.5);
    }
    const auto t = table_of(rows);
    EXPECT_NEAR(mean_risk_diff(t), oracle::grand_mean(rows), 1e-12);
    EXPECT_NEAR(pooled_variance(t), oracle::pooled_sd(rows), 1e-12);
    const double w = rng.uniform();
    const double ref = oracle::mean_exp(rows, w);
    EXPECT_NEAR(exp_risk_stat(t, w).value, ref, 1e-12 * std::max(1.0, ref));
    if (nonneg) {
      EXPECT_LE(exp_risk_stat(t, w).value, exp_risk_stat(t, w + 0.1).value * (1 + 1e-15));
      const auto neg = t.negated();
      EXPECT_GE(exp_risk_stat(neg, w).value, exp_risk_stat(neg, w + 0.1).value * (1 - 1e-15));
    }
  }
}

TEST(Table, DigestTracksContent) {
  auto a = table_of({{1, 2}});
  auto b = table_of({{1, 2}});
  EXPECT_EQ(a.digest(), b.digest());
  b.rows[0][1] = 2.0000001;
  EXPECT_NE(a.digest(), b.digest());
}
