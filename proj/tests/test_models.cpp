#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcs/dgp.hpp"
#include "mcs/forest.hpp"
#include "mcs/learners.hpp"
#include "mcs/linear.hpp"
#include "mcs/model.hpp"
#include "oracle.hpp"

using namespace mcs;

namespace {

Dataset random_regression(Index n, Index p, std::uint64_t seed) {
  Rng rng({seed, 0});
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    double s = 1.0;
    for (Index j = 0; j < p; ++j) {
      x(i, j) = rng.normal();
      s += static_cast<double>(j + 1) * x(i, j);
    }
    y(i) = s + rng.normal();
  }
  return Dataset(x, y, Task::regression);
}

Dataset permuted(const Dataset& d, std::uint64_t seed) {
  IndexList idx(static_cast<std::size_t>(d.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng({seed, 1});
  for (Index i = d.rows() - 1; i > 0; --i) {
    std::swap(idx[static_cast<std::size_t>(i)], idx[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }
  return d.subset(idx);
}

double log_loss_mean(const Eigen::VectorXd& p, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) s -= y(i) * std::log(p(i)) + (1 - y(i)) * std::log(1 - p(i));
  return s / static_cast<double>(y.size());
}

}  // namespace

TEST(Ols, ExactFit) {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 3, 4;
  const Dataset d(x, 2.0 * x.col(0), Task::regression);
  const Model m = fit_ols(d, IndexList{0});
  const auto* lm = m.as<LinearModel>();
  ASSERT_NE(lm, nullptr);
  EXPECT_NEAR(lm->coefficients()(0), 2.0, 1e-12);
  EXPECT_NEAR(lm->intercept(), 0.0, 1e-12);
  EXPECT_LT((m.predict(x) - d.target()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, ConstantTarget) {
  const auto base = random_regression(20, 3, 1);
  const Dataset d = base.with_target(Eigen::VectorXd::Constant(20, 5.0));
  const Model m = fit_ols(d);
  const auto* lm = m.as<LinearModel>();
  EXPECT_NEAR(lm->intercept(), 5.0, 1e-10);
  EXPECT_LT(lm->coefficients().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, MatchesNormalEquations) {
  const auto d = random_regression(50, 3, 2);
  const Model m = fit_ols(d);
  const auto* lm = m.as<LinearModel>();
  const Eigen::VectorXd ref = oracle::normal_equations(d.features(), d.target());
  EXPECT_NEAR(lm->intercept(), ref(0), 1e-8);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(lm->coefficients()(j), ref(j + 1), 1e-8);
}

TEST(Ols, RankDeficientMinimumNorm) {
  auto d = random_regression(30, 2, 3);
  Eigen::MatrixXd x(30, 3);
  x << d.features(), d.features().col(0);
  const Dataset dup(x, d.target(), Task::regression);
  const Model m = fit_ols(dup);
  const auto* lm = m.as<LinearModel>();
  ASSERT_TRUE(lm->coefficients().allFinite());
  // duplicate columns share the weight equally
  EXPECT_NEAR(lm->coefficients()(0), lm->coefficients()(2), 1e-8);
  const Model fm = fit_ols(d);
  const auto* full = fm.as<LinearModel>();
  EXPECT_NEAR(lm->coefficients()(0) + lm->coefficients()(2), full->coefficients()(0), 1e-8);
}

TEST(Ols, NoInterceptAndErrors) {
  const auto d = random_regression(40, 2, 4);
  const Model m = fit_ols(d, std::nullopt, OlsOptions{false});
  const auto* lm = m.as<LinearModel>();
  EXPECT_EQ(lm->intercept(), 0.0);
  const Dataset c(Eigen::MatrixXd::Zero(4, 1), Eigen::VectorXd::Zero(4), Task::classification);
  EXPECT_THROW(fit_ols(c), ConfigError);
  EXPECT_THROW(fit_ols(d, IndexList{5}), ConfigError);
}

TEST(Ols, OrderInvariant) {
  const auto d = random_regression(60, 4, 5);
  const auto probe = random_regression(10, 4, 6);
  const Eigen::VectorXd a = fit_ols(d).predict(probe.features());
  const Eigen::VectorXd b = fit_ols(permuted(d, 7)).predict(probe.features());
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Logistic, BalancedNoSignal) {
  Eigen::MatrixXd x(8, 1);
  Eigen::VectorXd y(8);
  // x values mirrored across classes
  x << -1, 1, -2, 2, -1, 1, -2, 2;
  y << 0, 0, 0, 0, 1, 1, 1, 1;
  const Dataset d(x, y, Task::classification);
  const Model m = fit_logistic(d);
  const auto* lm = m.as<LinearModel>();
  EXPECT_NEAR(lm->intercept(), 0.0, 1e-8);
  EXPECT_LT((m.predict(x).array() - 0.5).abs().maxCoeff(), 1e-8);
}

TEST(Logistic, SeparableBeatsNull) {
  Eigen::MatrixXd x(6, 1);
  Eigen::VectorXd y(6);
  x << -3, -2, -1, 1, 2, 3;
  y << 0, 0, 0, 1, 1, 1;
  const Dataset d(x, y, Task::classification);
  const Eigen::VectorXd p = fit_logistic(d).predict(x);
  ASSERT_TRUE(p.allFinite());
  EXPECT_LT(log_loss_mean(p, y), std::log(2.0));
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
}

TEST(Logistic, TwoPointMonotone) {
  Eigen::MatrixXd x(2, 1);
  x << 0, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  const Model m = fit_logistic(Dataset(x, y, Task::classification));
  Eigen::MatrixXd grid(21, 1);
  for (Index i = 0; i < 21; ++i) grid(i, 0) = -0.5 + 0.1 * static_cast<double>(i);
  const Eigen::VectorXd p = m.predict(grid);
  for (Index i = 1; i < 21; ++i) EXPECT_GT(p(i), p(i - 1));
  EXPECT_LT(p(5), 0.5);
  EXPECT_GT(p(15), 0.5);
}

TEST(Logistic, MatchesDirectNewtonOracle) {
  Rng rng({31, 0});
  const Index n = 200;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y(i) = rng.bernoulli(detail::sigmoid(0.3 + x(i, 0) - 0.5 * x(i, 1))) ? 1.0 : 0.0;
  }
  const Model m = fit_logistic(Dataset(x, y, Task::classification));
  const auto* lm = m.as<LinearModel>();
  // Score equations of the penalized likelihood vanish at the optimum.
  Eigen::MatrixXd d(n, 3);
  d << Eigen::VectorXd::Ones(n), x;
  Eigen::VectorXd b(3);
  b << lm->intercept(), lm->coefficients();
  Eigen::VectorXd p = (d * b).unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  Eigen::VectorXd score = d.transpose() * (y - p);
  score(1) -= 1e-6 * b(1);
  score(2) -= 1e-6 * b(2);
  EXPECT_LT(score.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Logistic, Errors) {
  const Dataset one(Eigen::MatrixXd::Zero(3, 1), Eigen::VectorXd::Ones(3), Task::classification);
  EXPECT_THROW(fit_logistic(one), DataError);
  EXPECT_THROW(fit_logistic(random_regression(5, 1, 1)), ConfigError);
}

TEST(Logistic, OrderInvariant) {
  Rng rng({32, 0});
  Eigen::MatrixXd x(80, 2);
  Eigen::VectorXd y(80);
  for (Index i = 0; i < 80; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y(i) = rng.bernoulli(detail::sigmoid(x(i, 0))) ? 1.0 : 0.0;
  }
  const Dataset d(x, y, Task::classification);
  const Eigen::VectorXd a = fit_logistic(d).predict(x);
  const Eigen::VectorXd b = fit_logistic(permuted(d, 3)).predict(x);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Forest, StumpIsTrainingMean) {
  const auto d = random_regression(40, 3, 8);
  ForestParams p;
  p.trees = 1;
  p.max_depth = 0;
  p.bootstrap = false;
  const Eigen::VectorXd pred = fit_random_forest(d, p, {1, 1}).predict(random_regression(5, 3, 9).features());
  for (Index i = 0; i < pred.size(); ++i) EXPECT_NEAR(pred(i), d.target().mean(), 1e-12);
}

TEST(Forest, PureTarget) {
  const auto base = random_regression(30, 2, 10);
  const Dataset d = base.with_target(Eigen::VectorXd::Constant(30, 3.25));
  const Eigen::VectorXd pred = fit_random_forest(d, {}, {2, 2}).predict(random_regression(7, 2, 11).features());
  for (Index i = 0; i < pred.size(); ++i) EXPECT_EQ(pred(i), 3.25);
}

TEST(Forest, StepFunction) {
  Rng rng({12, 0});
  auto draw = [&](Index n) {
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = 2.0 * rng.uniform() - 1.0;
      y(i) = x(i, 0) > 0 ? 1.0 : 0.0;
    }
    return Dataset(x, y, Task::classification);
  };
  const auto train = draw(200);
  const auto test = draw(1000);
  ForestParams p;
  p.trees = 30;
  const Eigen::VectorXd prob = fit_random_forest(train, p, {3, 3}).predict(test.features());
  Index correct = 0;
  Index counted = 0;
  for (Index i = 0; i < test.rows(); ++i) {
    if (std::abs(test.features()(i, 0)) < 0.05) continue;
    ++counted;
    correct += (prob(i) > 0.5) == (test.target()(i) == 1.0) ? 1 : 0;
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(counted), 0.9);
}

TEST(Forest, RegressionWithinTargetRange) {
  const auto d = gen_mars(150, 3.0, {4, 4});
  const auto probe = gen_mars(200, 3.0, {5, 5});
  ForestParams p;
  p.trees = 20;
  const Eigen::VectorXd pred = fit_random_forest(d, p, {6, 6}).predict(probe.features() * 3.0);
  EXPECT_GE(pred.minCoeff(), d.target().minCoeff());
  EXPECT_LE(pred.maxCoeff(), d.target().maxCoeff());
}

TEST(Forest, ClassificationProbabilities) {
  Rng rng({13, 0});
  Eigen::MatrixXd x(120, 4);
  Eigen::VectorXd y(120);
  for (Index i = 0; i < 120; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = rng.normal();
    y(i) = rng.bernoulli(0.4) ? 1.0 : 0.0;
  }
  ForestParams p;
  p.trees = 15;
  const Eigen::VectorXd prob = fit_random_forest(Dataset(x, y, Task::classification), p, {1, 0}).predict(x * 2.0);
  EXPECT_GE(prob.minCoeff(), 0.0);
  EXPECT_LE(prob.maxCoeff(), 1.0);
}

TEST(Forest, DeterministicAndOrderInvariant) {
  const auto d = gen_mars(120, 2.0, {7, 7});
  ForestParams p;
  p.trees = 10;
  const Eigen::VectorXd a = fit_random_forest(d, p, {8, 8}).predict(d.features());
  const Eigen::VectorXd b = fit_random_forest(d, p, {8, 8}).predict(d.features());
  const Eigen::VectorXd c = fit_random_forest(permuted(d, 4), p, {8, 8}).predict(d.features());
  const Eigen::VectorXd e = fit_random_forest(d, p, {8, 9}).predict(d.features());
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == c);
  EXPECT_FALSE(a == e);
}

TEST(Forest, DepthAndLeafLimits) {
  const auto d = gen_mars(200, 2.0, {1, 2});
  ForestParams p;
  p.trees = 3;
  p.max_depth = 2;
  const auto m = fit_random_forest(d, p, {1, 1});
  for (const auto& t : m.as<RandomForestModel>()->trees()) EXPECT_LE(t.leaf_count(), 4U);
  p.max_depth = -1;
  p.min_leaf = 50;
  p.bootstrap = false;
  const auto m2 = fit_random_forest(d, p, {1, 1});
  for (const auto& t : m2.as<RandomForestModel>()->trees()) EXPECT_LE(t.leaf_count(), 4U);
}

TEST(Forest, FeaturesPerSplitDefaults) {
  ForestParams p;
  EXPECT_EQ(features_per_split(p, Task::regression, 6), 2);
  EXPECT_EQ(features_per_split(p, Task::regression, 2), 1);
  EXPECT_EQ(features_per_split(p, Task::classification, 9), 3);
  p.feature_fraction = 1.0;
  EXPECT_EQ(features_per_split(p, Task::regression, 5), 5);
}

TEST(Forest, SubsetProjection) {
  const auto d = gen_mars(100, 0.0, {2, 3});
  ForestParams p;
  p.trees = 5;
  const auto alg = forest_algorithm(p, IndexList{3, 4});
  const auto m = alg.fit(d, {1, 1});
  Eigen::MatrixXd x = d.features();
  const Eigen::VectorXd a = m.predict(x);
  x.col(0).setConstant(42.0);
  EXPECT_TRUE(a == m.predict(x));
}

TEST(ConstantAlgorithm, IgnoresTrainingData) {
  const auto fixed = fit_ols(random_regression(30, 2, 20));
  const auto alg = constant_algorithm(fixed);
  const auto probe = random_regression(10, 2, 21);
  const auto a = alg.fit(random_regression(30, 2, 22), {1, 0}).predict(probe.features());
  const auto b = alg.fit(random_regression(50, 2, 23), {2, 0}).predict(probe.features());
  EXPECT_TRUE(a == b);
}

TEST(ConstantAlgorithm, InSampleResiduals) {
  const auto d = random_regression(40, 2, 24);
  const Model m = fit_ols(d);
  const auto alg = constant_algorithm(m);
  const Eigen::VectorXd r1 = d.target() - alg.fit(d, {}).predict(d.features());
  const Eigen::VectorXd r2 = d.target() - m.predict(d.features());
  EXPECT_TRUE(r1 == r2);
}

TEST(Erm, SingletonTieAndSelection) {
  const auto d = random_regression(100, 2, 25);
  const LossFn sq = LossFn::squared_error();
  const Model a = Model::make<ConstantModel>(1.0);
  std::vector<Model> one{a};
  EXPECT_EQ(erm_index(one, d, sq), 0U);
  std::vector<Model> twins{Model::make<ConstantModel>(1.0), Model::make<ConstantModel>(1.0)};
  EXPECT_EQ(erm_index(twins, d, sq), 0U);
  const Model good = fit_ols(d);
  const Model bad = Model::make<ConstantModel>(-50.0);
  std::vector<Model> pair{bad, good};
  EXPECT_EQ(erm_index(pair, d, sq), 1U);
  EXPECT_LT(mean_loss(good, d, sq), mean_loss(bad, d, sq));
  EXPECT_THROW(erm_index(std::vector<Model>{}, d, sq), ConfigError);
}

TEST(Learners, ParseSpecs) {
  const auto f = parse_learner("forest:trees=30:min_leaf=5:features=0+2");
  EXPECT_EQ(f.kind, LearnerSpec::Kind::forest);
  EXPECT_EQ(f.forest.trees, 30);
  EXPECT_EQ(f.forest.min_leaf, 5);
  EXPECT_EQ(*f.features, (IndexList{0, 2}));
  const auto c = parse_learner("const:0.5");
  EXPECT_TRUE(c.enumerable());
  EXPECT_DOUBLE_EQ(c.constant, 0.5);
  LearnerDefaults defaults;
  defaults.intercept = false;
  EXPECT_FALSE(parse_learner("ols", defaults).intercept);
  EXPECT_TRUE(parse_learner("ols:intercept=true", defaults).intercept);
  EXPECT_THROW(parse_learner("svm"), ConfigError);
  EXPECT_THROW(parse_learner("forest:trees=abc"), ConfigError);
  EXPECT_THROW(parse_learner("forest:depth=3"), ConfigError);
}

TEST(Learners, RefitBitIdentical) {
  const auto d = gen_mars(80, 1.0, {1, 1});
  for (const char* spec : {"ols", "ols:intercept=false", "forest:trees=5", "const:2"}) {
    const auto alg = parse_learner(spec).algorithm();
    EXPECT_TRUE(alg.fit(d, {5, 5}).predict(d.features()) == alg.fit(d, {5, 5}).predict(d.features())) << spec;
  }
  Eigen::VectorXd y = (d.target().array() > d.target().mean()).cast<double>();
  const Dataset c(d.features(), y, Task::classification);
  const auto alg = parse_learner("logistic").algorithm();
  EXPECT_TRUE(alg.fit(c, {1, 1}).predict(c.features()) == alg.fit(c, {1, 1}).predict(c.features()));
}
