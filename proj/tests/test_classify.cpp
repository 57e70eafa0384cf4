#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cclass/cclass.hpp"

using namespace cclass;

namespace {

double accuracy_at_half(const std::vector<double>& p, const std::vector<int>& y) {
  double ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += (p[i] > 0.5 ? 1 : 0) == y[i];
  return ok / static_cast<double>(y.size());
}

std::vector<double> predict_all(const auto& model, const Eigen::MatrixXd& x) {
  std::vector<double> p;
  for (Eigen::Index i = 0; i < x.rows(); ++i) p.push_back(model.predict(x.row(i)));
  return p;
}

struct Xor {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Xor xor_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Xor d{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 2), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const int a = bernoulli(rng, 0.5), b = bernoulli(rng, 0.5);
    d.x(static_cast<Eigen::Index>(i), 0) = a;
    d.x(static_cast<Eigen::Index>(i), 1) = b;
    d.y[i] = a ^ b;
  }
  return d;
}

// T, Y and covariates X1 (binary), X2 (categorical), X3 (continuous); Y
// depends on T and X1.
Dataset uplift_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> t(n), y(n), x1(n), x2(n);
  std::vector<double> x3(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = bernoulli(rng, 0.5);
    x2[i] = static_cast<int>(uniform_index(rng, 3));
    x3[i] = standard_normal(rng);
    t[i] = bernoulli(rng, 0.3 + 0.4 * x1[i]);
    y[i] = bernoulli(rng, 0.2 + (x1[i] ? 0.5 : 0.1) * t[i] + 0.1 * x1[i]);
  }
  return Dataset({Column::binary("T", t, Role::treatment), Column::binary("Y", y, Role::outcome),
                  Column::binary("X1", x1), Column::categorical("X2", {"a", "b", "c"}, x2),
                  Column::continuous("X3", x3)});
}

ClassifierSpec forest_spec(int trees = 30) {
  ClassifierSpec s;
  s.kind = ClassifierKind::forest;
  s.forest.n_trees = trees;
  s.forest.seed = 5;
  return s;
}

ClassifierSpec logistic_spec() {
  ClassifierSpec s;
  s.kind = ClassifierKind::logistic;
  return s;
}

}  // namespace

TEST(Logistic, SingleClassIsSmoothedConstant) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 2);
  std::vector<int> y(8, 1);
  std::vector<std::string> warnings;
  const LogisticModel m = fit_logistic(x, y, {}, &warnings);
  EXPECT_TRUE(m.degenerate);
  EXPECT_FALSE(warnings.empty());
  for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_NEAR(m.predict(x.row(i)), 9.0 / 10.0, 1e-12);
}

TEST(Logistic, SeparableData) {
  Rng rng(2);
  const std::size_t n = 200;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = standard_normal(rng), b = standard_normal(rng);
    const int label = a + b > 0 ? 1 : 0;
    x(i, 0) = a + (label ? 0.3 : -0.3);
    x(i, 1) = b;
    y[i] = label;
  }
  const LogisticModel m = fit_logistic(x, y);
  EXPECT_EQ(accuracy_at_half(predict_all(m, x), y), 1.0);
}

TEST(Logistic, RecoversKnownWeights) {
  Rng rng(31);
  const std::size_t n = 5000;
  const Eigen::Vector3d w(-0.5, 1.0, -2.0);  // intercept first
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = standard_normal(rng);
    x(i, 1) = bernoulli(rng, 0.4);
    y[i] = bernoulli(rng, sigmoid(w(0) + w(1) * x(i, 0) + w(2) * x(i, 1)));
  }
  LogisticParams hp;
  hp.l2_penalty = 1e-8;
  const LogisticModel m = fit_logistic(x, y, hp);
  ASSERT_TRUE(m.converged);
  // Standard errors from the observed information at the estimate.
  Eigen::MatrixXd a(n, 3);
  a.col(0).setOnes();
  a.rightCols(2) = x;
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(3, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = sigmoid(a.row(i).dot(m.weights));
    info += p * (1 - p) * a.row(i).transpose() * a.row(i);
  }
  const Eigen::MatrixXd cov = info.inverse();
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::fabs(m.weights(k) - w(k)), 2 * std::sqrt(cov(k, k))) << k;
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 3);
  std::vector<int> y(40);
  for (auto& v : y) v = bernoulli(rng, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd w(4);
    for (int k = 0; k < 4; ++k) w(k) = standard_normal(rng);
    const Eigen::VectorXd g = logistic_gradient(w, x, y, 0.3);
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-6;
      Eigen::VectorXd up = w, dn = w;
      up(k) += h;
      dn(k) -= h;
      const double fd = (logistic_objective(up, x, y, 0.3) - logistic_objective(dn, x, y, 0.3)) / (2 * h);
      EXPECT_NEAR(g(k), fd, 1e-5 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST(Logistic, FailsOnXor) {
  const Xor d = xor_data(2000, 3);
  EXPECT_LT(accuracy_at_half(predict_all(fit_logistic(d.x, d.y), d.x), d.y), 0.6);
}

TEST(Logistic, InputValidation) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  EXPECT_THROW(fit_logistic(x, std::vector<int>{0, 1}), Error);
  EXPECT_THROW(fit_logistic(x, std::vector<int>{0, 1, 2}), Error);
  LogisticParams hp;
  hp.max_iterations = 0;
  EXPECT_THROW(fit_logistic(x, std::vector<int>{0, 1, 0}, hp), Error);
}

TEST(Forest, LearnsXor) {
  const Xor d = xor_data(2000, 4);
  ForestParams hp;
  hp.n_trees = 50;
  hp.seed = 9;
  const ForestModel m = fit_forest(d.x, d.y, hp);
  EXPECT_GE(accuracy_at_half(predict_all(m, d.x), d.y), 0.95);
  EXPECT_GE(m.oob_accuracy, 0.95);
}

TEST(Forest, PureNoiseOobNearMajorityRate) {
  Rng rng(6);
  const std::size_t n = 1000;
  Eigen::MatrixXd x(n, 5);
  std::vector<int> y(n);
  double pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 5; ++k) x(i, k) = standard_normal(rng);
    y[i] = bernoulli(rng, 0.7);
    pos += y[i];
  }
  ForestParams hp;
  hp.n_trees = 100;
  hp.min_leaf = 5;
  const ForestModel m = fit_forest(x, y, hp);
  const double majority = std::max(pos, n - pos) / n;
  EXPECT_NEAR(m.oob_accuracy, majority, 0.05);
}

TEST(Forest, SeedDeterminesPredictions) {
  const Xor d = xor_data(300, 5);
  ForestParams hp;
  hp.n_trees = 20;
  hp.seed = 77;
  const auto a = predict_all(fit_forest(d.x, d.y, hp), d.x);
  const auto b = predict_all(fit_forest(d.x, d.y, hp), d.x);
  EXPECT_EQ(a, b);
}

TEST(Forest, DepthAndLeafLimits) {
  const Xor d = xor_data(500, 6);
  ForestParams hp;
  hp.n_trees = 5;
  hp.max_depth = 1;
  const ForestModel m = fit_forest(d.x, d.y, hp);
  for (const auto& t : m.trees) EXPECT_LE(t.feature.size(), 3u);
  hp.max_depth = 0;
  hp.min_leaf = 0;
  EXPECT_THROW(fit_forest(d.x, d.y, hp), Error);
}

TEST(Forest, NoFeaturesGivesFrequency) {
  Eigen::MatrixXd x(5, 0);
  const std::vector<int> y = {1, 0, 0, 1, 1};
  const ForestModel m = fit_forest(x, y);
  EXPECT_DOUBLE_EQ(m.predict(Eigen::RowVectorXd(0)), 0.6);
}

TEST(Encoder, OneHotAndMissingColumns) {
  const Dataset d = uplift_data(50, 1);
  const std::vector<std::string> cols = {"X1", "X2", "X3"};
  const FeatureEncoder enc = FeatureEncoder::fit(d, cols);
  EXPECT_EQ(enc.width(), 1u + 3u + 1u);
  const Eigen::MatrixXd x = enc.transform(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_DOUBLE_EQ(x.row(i).segment(1, 3).sum(), 1.0);

  const std::vector<std::string> keep = {"T", "Y", "X3"};
  try {
    enc.transform(d.select(keep));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingColumn);
    EXPECT_NE(std::string(e.what()).find("X1, X2"), std::string::npos);
  }
}

TEST(Encoder, UnseenCategoryWarns) {
  const Dataset train({Column::categorical("c", {"a", "b", "c"}, {0, 1, 2, 0})});
  const Dataset test({Column::categorical("c", {"a", "z", "q"}, {0, 1, 2})});
  const std::vector<std::string> cols = {"c"};
  const FeatureEncoder enc = FeatureEncoder::fit(train, cols);
  std::vector<std::string> warnings;
  const Eigen::MatrixXd x = enc.transform(test, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_DOUBLE_EQ(x(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(x.row(1).sum(), 0.0);
}

TEST(TwoModel, OutcomeEqualsTreatment) {
  Rng rng(10);
  std::vector<int> t(400), x(400);
  for (std::size_t i = 0; i < 400; ++i) {
    t[i] = bernoulli(rng, 0.5);
    x[i] = bernoulli(rng, 0.5);
  }
  const Dataset d({Column::binary("T", t), Column::binary("Y", t), Column::binary("X", x)});
  for (const auto& spec : {forest_spec(), logistic_spec()}) {
    ParentSet ps;
    ps.members = {"T", "X"};
    const TwoModelPair pair = train_cctm(d, "T", "Y", ps, spec);
    EXPECT_EQ(pair.parents_excl_t, std::vector<std::string>{"X"});
    for (const auto& p : predict_cctm(pair, d, 0.0)) {
      EXPECT_GT(p.p1, 0.99);
      EXPECT_LT(p.p0, 0.01);
      EXPECT_GT(p.effect, 0.98);
      EXPECT_EQ(p.assign, 1);
    }
  }
}

TEST(TwoModel, NoParentsGivesArmFrequencies) {
  // 10 treated rows with 9 positives, 10 controls with 2.
  std::vector<int> t, y;
  for (int i = 0; i < 10; ++i) {
    t.push_back(1);
    y.push_back(i < 9);
  }
  for (int i = 0; i < 10; ++i) {
    t.push_back(0);
    y.push_back(i < 2);
  }
  const Dataset d({Column::binary("T", t), Column::binary("Y", y)});
  ParentSet ps;
  ps.members = {"T"};
  for (const auto& spec : {forest_spec(), logistic_spec()}) {
    const TwoModelPair pair = train_cctm(d, "T", "Y", ps, spec);
    EXPECT_TRUE(pair.parents_excl_t.empty());
    const auto preds = predict_cctm(pair, d, 0.5);
    for (const auto& p : preds) {
      EXPECT_NEAR(p.p1, 0.9, 1e-6);
      EXPECT_NEAR(p.p0, 0.2, 1e-6);
      EXPECT_NEAR(p.effect, 0.7, 1e-6);
      EXPECT_EQ(p.assign, 1);
    }
    for (const auto& p : predict_cctm(pair, d, 0.8)) EXPECT_EQ(p.assign, 0);
  }
}

TEST(TwoModel, IdenticalArmsGiveZeroEffect) {
  const Dataset d = uplift_data(500, 2);
  TwoModelPair pair = train_two_model(d, "T", "Y", {"X1", "X3"}, forest_spec(10));
  pair.control = pair.treated;
  for (const auto& p : predict_cctm(pair, d, 0.0)) {
    EXPECT_EQ(p.effect, 0.0);
    EXPECT_EQ(p.assign, 0);
  }
}

TEST(TwoModel, ThetaAboveMaxAssignsNobody) {
  const Dataset d = uplift_data(500, 3);
  const TwoModelPair pair = train_two_model(d, "T", "Y", {"X1", "X2"}, logistic_spec());
  double max_effect = -1;
  for (const auto& p : predict_cctm(pair, d, 0.0)) max_effect = std::max(max_effect, p.effect);
  for (const auto& p : predict_cctm(pair, d, std::max(0.0, max_effect) + 0.01)) EXPECT_EQ(p.assign, 0);
  EXPECT_THROW(predict_cctm(pair, d, -0.1), Error);
}

TEST(TwoModel, SwappingArmsNegatesEffect) {
  const Dataset d = uplift_data(600, 4);
  std::vector<int> flipped = d.column("T").codes;
  for (auto& v : flipped) v = 1 - v;
  Dataset swapped = d;
  swapped.replace_column(0, Column::binary("T", flipped, Role::treatment));
  for (const auto& spec : {forest_spec(15), logistic_spec()}) {
    const auto a = predict_cctm(train_two_model(d, "T", "Y", {"X1", "X2", "X3"}, spec), d, 0.0);
    const auto b = predict_cctm(train_two_model(swapped, "T", "Y", {"X1", "X2", "X3"}, spec), d, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].p1, b[i].p0);
      EXPECT_EQ(a[i].effect, -b[i].effect);
    }
  }
}

TEST(TwoModel, EmptyArm) {
  const Dataset d({Column::binary("T", {1, 1, 1}), Column::binary("Y", {0, 1, 0})});
  try {
    train_two_model(d, "T", "Y", {}, logistic_spec());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyArm);
    EXPECT_NE(std::string(e.what()).find("control rows: 0"), std::string::npos);
  }
}

TEST(TwoModel, DiscoversParentsWhenNotGiven) {
  const Dataset d = uplift_data(4000, 5);
  const TwoModelPair pair = train_cctm(d, "T", "Y", std::nullopt, logistic_spec());
  EXPECT_EQ(pair.parents_excl_t, std::vector<std::string>{"X1"});
}

TEST(TwoModel, PersistenceRoundTrip) {
  const Dataset d = uplift_data(800, 6);
  for (const auto& spec : {forest_spec(20), logistic_spec()}) {
    const TwoModelPair pair = train_two_model(d, "T", "Y", {"X1", "X2", "X3"}, spec);
    const TwoModelPair back = two_model_from_json(nlohmann::json::parse(to_json(pair).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(pair).dump());
    const auto a = predict_cctm(pair, d, 0.0);
    const auto b = predict_cctm(back, d, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::fabs(a[i].effect - b[i].effect), 1e-12);
  }
  EXPECT_THROW(two_model_from_json(nlohmann::json{{"format", "other"}}), Error);
}

TEST(Ranking, Orders) {
  EXPECT_EQ(rank_by_effect(std::vector<double>{0.1, 0.5, 0.3}), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(rank_by_effect(std::vector<double>{0.2, 0.5, 0.2}), (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(rank_by_effect(std::vector<double>{0.4, 0.4, 0.4}), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(ClassifierSpec, JsonRoundTrip) {
  ClassifierSpec s = forest_spec(42);
  s.forest.max_depth = 7;
  s.logistic.l2_penalty = 0.5;
  EXPECT_EQ(to_json(classifier_spec_from_json(to_json(s))).dump(), to_json(s).dump());
  EXPECT_FALSE(parse_classifier("svm"));
}
