#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crossconf/errors.hpp"
#include "crossconf/pvalues.hpp"
#include "oracles.hpp"

using namespace crossconf;

namespace {

struct Fixture {
  oracle::Instance inst;
  Dataset data;
  FoldAssignment folds;
  CvScores cv;

  Fixture(std::size_t n, std::size_t p, std::size_t K, FoldMode mode, std::uint64_t seed)
      : inst(oracle::gaussian_instance(n, p, seed)),
        data(inst.x, inst.y),
        folds(assign_folds(n, K, mode, RandomSource(seed))),
        cv(compute_cv_scores(data, folds, ScoreFunctionSpec{})) {}
};

}  // namespace

TEST(FoldPValue, HandExamples) {
  EXPECT_DOUBLE_EQ(fold_pvalue(2.0, std::vector<double>{1.0, 3.0}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(fold_pvalue(10.0, std::vector<double>{1, 2, 3, 4}), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(fold_pvalue(0.0, std::vector<double>{1, 2, 3, 4}), 1.0);
}

TEST(FoldPValueRandomized, HandExamples) {
  EXPECT_DOUBLE_EQ(fold_pvalue_randomized(2.0, std::vector<double>{1, 2, 3}, 0.5), 0.5);
  EXPECT_THROW(fold_pvalue_randomized(2.0, std::vector<double>{1, 2, 3}, 0.0), InvalidConfiguration);
  EXPECT_THROW(fold_pvalue_randomized(2.0, std::vector<double>{1, 2, 3}, 1.0), InvalidConfiguration);
  // tau near 1 with no ties approaches the deterministic value.
  const std::vector<double> s{0.3, 1.7, 2.2, 5.0};
  EXPECT_NEAR(fold_pvalue_randomized(2.0, s, 1.0 - 1e-12), fold_pvalue(2.0, s), 1e-11);
}

TEST(FoldPValueRandomized, DominatedByDeterministic) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < 2000; ++r) {
    std::vector<double> s(7);
    for (double& v : s) v = std::floor(u(eng) * 5.0);  // plenty of ties
    const double t = std::floor(u(eng) * 6.0);
    const double tau = 0.001 + 0.998 * u(eng);
    EXPECT_LE(fold_pvalue_randomized(t, s, tau), fold_pvalue(t, s));
  }
}

TEST(AllFoldPValues, HandExample) {
  // Three folds of size 2; scores (1,3), (5,7), (0,9); test scores 2, 8, 10
  // under a zero model with the test response placed per fold.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 1);
  Eigen::VectorXd y(6);
  y << 1, 3, 5, 7, 0, 9;
  const Dataset data(x, y);
  const FoldAssignment folds(6, FoldMode::equal_size, {{0, 1}, {2, 3}, {4, 5}});
  ScoreFunctionSpec spec;
  spec.regressor = RegressorSpec::constant_with(0.0);
  const auto cv = compute_cv_scores(data, folds, spec);
  const Eigen::RowVectorXd q = Eigen::RowVectorXd::Zero(1);
  const std::vector<double> s{fold_pvalue(2.0, cv.fold_scores(0)), fold_pvalue(8.0, cv.fold_scores(1)),
                              fold_pvalue(10.0, cv.fold_scores(2))};
  EXPECT_DOUBLE_EQ(s[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s[2], 1.0 / 3.0);
  // With a single shared candidate the library path must agree with per-fold counting.
  const auto pv = all_fold_pvalues(q, 2.0, cv);
  EXPECT_DOUBLE_EQ(pv.values[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pv.values[1], 1.0);
  EXPECT_DOUBLE_EQ(pv.values[2], 2.0 / 3.0);
}

TEST(AllFoldPValues, SingleFold) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  const Dataset data(x, y);
  const auto folds = assign_folds(4, 1, FoldMode::equal_size, RandomSource(2));
  ScoreFunctionSpec spec;
  spec.regressor = RegressorSpec::constant_with(0.0);
  const auto cv = compute_cv_scores(data, folds, spec);
  const auto pv = all_fold_pvalues(Eigen::RowVectorXd::Zero(1), 2.5, cv);
  ASSERT_EQ(pv.size(), 1u);
  EXPECT_DOUBLE_EQ(pv.values[0], fold_pvalue(2.5, std::vector<double>{1, 2, 3, 4}));
}

TEST(AllFoldPValues, SortedPathMatchesLinearScan) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Fixture f(57, 5, 5, seed % 2 ? FoldMode::varying_size : FoldMode::equal_size, seed);
    const CalibratedQuery q(f.cv, f.inst.test_x);
    const auto draws = draw_randomization(RandomSource(seed));
    for (double y : q.breakpoints()) {
      const auto a = all_fold_pvalues(f.inst.test_x, y, f.cv);
      const auto b = q.pvalues(y);
      ASSERT_EQ(a.values, b.values);
      ASSERT_EQ(a.values, oracle::fold_pvalues(f.cv, f.inst.test_x, y));
      const auto ar = all_fold_pvalues(f.inst.test_x, y, f.cv, draws);
      const auto br = q.pvalues(y, draws.tau);
      ASSERT_EQ(ar.values, br.values);
      ASSERT_EQ(ar.values, oracle::fold_pvalues(f.cv, f.inst.test_x, y, draws.tau));
      ASSERT_TRUE(ar.randomized);
      ASSERT_EQ(*ar.tau, draws.tau);
    }
  }
}

TEST(PValueVector, GridMembershipAndDominance) {
  std::mt19937_64 eng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::size_t violations = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Fixture f(30, 3, 3, FoldMode::equal_size, seed + 100);
    const double y = f.inst.test_y + z(eng);
    const double tau = uniform_open(eng);
    const auto det = all_fold_pvalues(f.inst.test_x, y, f.cv);
    const auto ran = all_fold_pvalues(f.inst.test_x, y, f.cv, RandomDraws{tau, 0.5});
    for (std::size_t k = 0; k < 3; ++k) {
      const double scaled = det.values[k] * 11.0;
      EXPECT_EQ(scaled, std::round(scaled));
      EXPECT_GT(det.values[k], 0.0);
      EXPECT_LE(det.values[k], 1.0);
      if (ran.values[k] > det.values[k]) ++violations;
      EXPECT_GT(ran.values[k], 0.0);
    }
  }
  EXPECT_EQ(violations, 0u);
}

TEST(FoldWeights, HandExamples) {
  const auto w = fold_weights(std::vector<std::size_t>{21, 20, 20, 20, 20});
  EXPECT_DOUBLE_EQ(w.weights[0], 22.0 / 106.0);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_DOUBLE_EQ(w.weights[k], 21.0 / 106.0);
  double sum = 0.0;
  for (double v : w.weights) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  const auto eq = fold_weights(std::vector<std::size_t>{7, 7, 7});
  for (double v : eq.weights) EXPECT_EQ(v, 1.0 / 3.0);
  EXPECT_EQ(fold_weights(std::vector<std::size_t>{9}).weights[0], 1.0);
}

// Super-uniformity of the fold p-value at the true test response.
TEST(PValueVector, SuperUniformAtTruth) {
  const int trials = 5000;
  std::vector<int> hits(3, 0);
  const double alphas[3] = {0.05, 0.1, 0.2};
  for (int t = 0; t < trials; ++t) {
    Fixture f(40, 3, 4, FoldMode::equal_size, 50000 + static_cast<std::uint64_t>(t));
    const auto pv = all_fold_pvalues(f.inst.test_x, f.inst.test_y, f.cv);
    for (int a = 0; a < 3; ++a) {
      if (pv.values[0] <= alphas[a]) ++hits[a];
    }
  }
  for (int a = 0; a < 3; ++a) {
    const double se = std::sqrt(alphas[a] * (1 - alphas[a]) / trials);
    EXPECT_LE(static_cast<double>(hits[a]) / trials, alphas[a] + 3 * se) << "alpha=" << alphas[a];
  }
}
