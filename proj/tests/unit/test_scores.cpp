#include <gtest/gtest.h>

#include <random>

#include "crossconf/errors.hpp"
#include "crossconf/scores.hpp"
#include "oracles.hpp"

using namespace crossconf;

namespace {

ScoreFunctionSpec residual(RegressorSpec reg) {
  ScoreFunctionSpec s;
  s.regressor = reg;
  return s;
}

}  // namespace

TEST(CvScores, ConstantZeroModel) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  Eigen::VectorXd y(3);
  y << 1, -2, 3;
  const Dataset data(x, y);
  const auto folds = assign_folds(3, 3, FoldMode::equal_size, RandomSource(1));
  const auto cv = compute_cv_scores(data, folds, residual(RegressorSpec::constant_with(0.0)));
  EXPECT_EQ(cv.score(0), 1.0);
  EXPECT_EQ(cv.score(1), 2.0);
  EXPECT_EQ(cv.score(2), 3.0);
}

TEST(CvScores, ZeroFunctionFoldGivesAbsResponses) {
  // Fold 2 has all-zero responses, so the model trained on it is the zero map.
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 5, -7, 0, 0;
  const Dataset data(x, y);
  const FoldAssignment folds(4, FoldMode::equal_size, {{0, 1}, {2, 3}});
  const auto cv = compute_cv_scores(data, folds, residual(RegressorSpec::ols()));
  EXPECT_NEAR(cv.score(0), 5.0, 1e-12);
  EXPECT_NEAR(cv.score(1), 7.0, 1e-12);
}

TEST(CvScores, MatchesPerPointRefit) {
  const auto inst = oracle::gaussian_instance(43, 6, 99);
  const Dataset data(inst.x, inst.y);
  const auto folds = assign_folds(43, 5, FoldMode::equal_size, RandomSource(4));
  const auto cv = compute_cv_scores(data, folds, residual(RegressorSpec::ols()));
  for (std::size_t i = 0; i < 43; ++i) {
    const std::size_t k = folds.fold_of(i);
    if (k == FoldAssignment::kDiscarded) {
      EXPECT_TRUE(std::isnan(cv.score(i)));
      continue;
    }
    const auto comp = folds.complement(k);
    const Eigen::VectorXd b = oracle::normal_equations(data.feature_rows(comp), data.response_rows(comp));
    const auto row = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(cv.score(i), std::abs(inst.y(row) - inst.x.row(row).dot(b)), 1e-10);
  }
}

TEST(CvScores, EmptyComplementRejected) {
  const auto inst = oracle::gaussian_instance(10, 2, 1);
  const Dataset data(inst.x, inst.y);
  const auto folds = assign_folds(10, 1, FoldMode::equal_size, RandomSource(1));
  EXPECT_THROW(compute_cv_scores(data, folds, residual(RegressorSpec::ols())), InvalidConfiguration);
  EXPECT_NO_THROW(compute_cv_scores(data, folds, residual(RegressorSpec::constant_with(0.0))));
}

TEST(TestScore, VShapeAndCaching) {
  const auto inst = oracle::gaussian_instance(50, 4, 5);
  const Dataset data(inst.x, inst.y);
  const auto folds = assign_folds(50, 5, FoldMode::equal_size, RandomSource(5));
  const auto cv = compute_cv_scores(data, folds, residual(RegressorSpec::ols()));
  std::mt19937_64 eng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int q = 0; q < 100; ++q) {
    Eigen::RowVectorXd x(4);
    for (int j = 0; j < 4; ++j) x(j) = z(eng);
    const double y = 3.0 * z(eng);
    const std::size_t k = static_cast<std::size_t>(q) % 5;
    const auto comp = folds.complement(k);
    const Eigen::VectorXd b = oracle::normal_equations(data.feature_rows(comp), data.response_rows(comp));
    const double mu = x.dot(b);
    EXPECT_NEAR(test_score(x, y, k, cv), std::abs(y - mu), 1e-10);
    const double center = cv.model(k).predict(x);
    EXPECT_EQ(test_score(x, center, k, cv), 0.0);
    for (double c : {0.0, 0.5, 2.0, 10.0}) {
      EXPECT_NEAR(test_score(x, center + c, k, cv), c, 1e-12);
      EXPECT_NEAR(test_score(x, center - c, k, cv), c, 1e-12);
    }
  }
}

TEST(CvScores, FitsExactlyKModels) {
  const auto inst = oracle::gaussian_instance(30, 3, 8);
  const Dataset data(inst.x, inst.y);
  const auto folds = assign_folds(30, 3, FoldMode::equal_size, RandomSource(8));
  const auto cv = compute_cv_scores(data, folds, residual(RegressorSpec::ols()));
  EXPECT_THROW((void)cv.model(3), std::out_of_range);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& sorted = cv.sorted_fold_scores(k);
    EXPECT_TRUE(std::is_sorted(sorted.begin(), sorted.end()));
    EXPECT_EQ(sorted.size(), 10u);
    for (double s : sorted) EXPECT_GE(s, 0.0);
  }
}
