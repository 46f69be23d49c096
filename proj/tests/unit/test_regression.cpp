#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "crossconf/errors.hpp"
#include "crossconf/regression.hpp"
#include "oracles.hpp"

using namespace crossconf;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& eng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(eng);
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Ols, IdentityDesign) {
  const auto m = fit_min_norm_ols(Eigen::MatrixXd::Identity(2, 2), vec({2, 3}));
  EXPECT_NEAR(m.coefficients()(0), 2.0, 1e-12);
  EXPECT_NEAR(m.coefficients()(1), 3.0, 1e-12);
}

TEST(Ols, UnderdeterminedSingleRow) {
  Eigen::MatrixXd x(1, 2);
  x << 1, 1;
  const auto m = fit_min_norm_ols(x, vec({2}));
  EXPECT_NEAR(m.coefficients()(0), 1.0, 1e-12);
  EXPECT_NEAR(m.coefficients()(1), 1.0, 1e-12);
}

TEST(Ols, MatchesNormalEquations) {
  std::mt19937_64 eng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd x = gaussian(50, 5, eng);
    const Eigen::VectorXd y = gaussian(50, 1, eng);
    const Eigen::VectorXd ref = oracle::normal_equations(x, y);
    const Eigen::VectorXd got = fit_min_norm_ols(x, y).coefficients();
    EXPECT_LT((got - ref).norm() / ref.norm(), 1e-8);
  }
}

TEST(Ols, PseudoinverseIdentity) {
  std::mt19937_64 eng(12);
  for (auto [r, c] : std::vector<std::pair<int, int>>{{10, 3}, {3, 10}, {40, 40}, {100, 150}, {150, 100}}) {
    const Eigen::MatrixXd x = gaussian(r, c, eng);
    const Eigen::MatrixXd pinv = pseudoinverse(x);
    EXPECT_LT((x * pinv * x - x).norm() / x.norm(), 1e-8) << r << "x" << c;
  }
  // Rank deficient: duplicated column.
  Eigen::MatrixXd x = gaussian(20, 4, eng);
  x.col(3) = x.col(1);
  EXPECT_LT((x * pseudoinverse(x) * x - x).norm(), 1e-8);
}

TEST(Ols, RejectsNonFinite) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  x(0, 1) = std::nan("");
  EXPECT_THROW(fit_min_norm_ols(x, vec({1, 2})), InvalidData);
}

TEST(Ridge, LambdaZeroIsOls) {
  std::mt19937_64 eng(13);
  const Eigen::MatrixXd x = gaussian(30, 4, eng);
  const Eigen::VectorXd y = gaussian(30, 1, eng);
  EXPECT_LT((fit_ridge(x, y, 0.0).coefficients() - fit_min_norm_ols(x, y).coefficients()).norm(), 1e-8);
}

TEST(Ridge, HugeLambdaShrinks) {
  std::mt19937_64 eng(14);
  const Eigen::MatrixXd x = gaussian(30, 4, eng);
  const Eigen::VectorXd y = gaussian(30, 1, eng);
  EXPECT_LT(fit_ridge(x, y, 1e12).coefficients().cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ridge, HandExample) {
  const auto m = fit_ridge(Eigen::MatrixXd::Identity(2, 2), vec({2, 3}), 1.0);
  EXPECT_NEAR(m.coefficients()(0), 1.0, 1e-12);
  EXPECT_NEAR(m.coefficients()(1), 1.5, 1e-12);
}

TEST(Ridge, MatchesRegularizedNormalEquations) {
  std::mt19937_64 eng(15);
  const Eigen::MatrixXd x = gaussian(25, 6, eng);
  const Eigen::VectorXd y = gaussian(25, 1, eng);
  const double lambda = 0.7;
  const Eigen::MatrixXd a = x.transpose() * x + lambda * Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd ref = a.ldlt().solve(x.transpose() * y);
  EXPECT_LT((fit_ridge(x, y, lambda).coefficients() - ref).norm(), 1e-10);
}

TEST(Ridge, RejectsNegativeLambda) { EXPECT_THROW(RegressorSpec::parse("ridge:-1"), InvalidConfiguration); }

TEST(Knn, FullNeighborhoodIsMean) {
  std::mt19937_64 eng(16);
  const Eigen::MatrixXd x = gaussian(12, 3, eng);
  const Eigen::VectorXd y = gaussian(12, 1, eng);
  const auto m = fit_knn(x, y, 12);
  const Eigen::MatrixXd q = gaussian(5, 3, eng);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(m.predict(q.row(i)), y.mean(), 1e-12);
}

TEST(Knn, ExactMatch) {
  Eigen::MatrixXd x(3, 1);
  x << 0, 5, 9;
  const auto m = fit_knn(x, vec({1, 2, 3}), 1);
  Eigen::RowVectorXd q(1);
  q << 5;
  EXPECT_EQ(m.predict(q), 2.0);
}

TEST(Knn, TwoNearest) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const auto m = fit_knn(x, vec({10, 20, 30}), 2);
  Eigen::RowVectorXd q(1);
  q << 0;
  EXPECT_DOUBLE_EQ(m.predict(q), 15.0);
}

TEST(Knn, TiesBrokenByResponseNotIndex) {
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  Eigen::RowVectorXd q(1);
  q << 0;
  EXPECT_EQ(fit_knn(x, vec({7, 3}), 1).predict(q), 3.0);
  Eigen::MatrixXd xr(2, 1);
  xr << 1, -1;
  EXPECT_EQ(fit_knn(xr, vec({3, 7}), 1).predict(q), 3.0);
}

TEST(Knn, RejectsLargeK) {
  EXPECT_THROW(fit_knn(Eigen::MatrixXd::Identity(2, 2), vec({1, 2}), 3), InvalidConfiguration);
}

TEST(Regressor, ParseRoundTrip) {
  for (const char* text : {"ols", "ridge:0.2", "knn:25", "const:0"}) {
    EXPECT_EQ(RegressorSpec::parse(RegressorSpec::parse(text).to_string()).to_string(),
              RegressorSpec::parse(text).to_string());
  }
  EXPECT_EQ(RegressorSpec::parse("ridge:0.2").lambda, 0.2);
  EXPECT_EQ(RegressorSpec::parse("knn:25").k, 25u);
  EXPECT_THROW(RegressorSpec::parse("forest"), InvalidConfiguration);
  EXPECT_THROW(RegressorSpec::parse("knn:0"), InvalidConfiguration);
}

// Executable form of the symmetry requirement on the algorithm.
TEST(Regressor, PermutationSymmetry) {
  std::mt19937_64 eng(17);
  const Eigen::MatrixXd x = gaussian(40, 4, eng);
  const Eigen::VectorXd y = gaussian(40, 1, eng);
  const Eigen::MatrixXd q = gaussian(100, 4, eng);
  for (const char* text : {"ols", "ridge:0.5", "knn:5", "const:1.5"}) {
    for (bool standardize : {false, true}) {
      RegressorSpec spec = RegressorSpec::parse(text);
      spec.standardize = standardize;
      const Eigen::VectorXd base = fit(spec, x, y).predict_rows(q);
      std::vector<Eigen::Index> perm(40);
      std::iota(perm.begin(), perm.end(), 0);
      for (int r = 0; r < 50; ++r) {
        std::shuffle(perm.begin(), perm.end(), eng);
        Eigen::MatrixXd xp(40, 4);
        Eigen::VectorXd yp(40);
        for (Eigen::Index i = 0; i < 40; ++i) {
          xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
          yp(i) = y(perm[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd got = fit(spec, xp, yp).predict_rows(q);
        ASSERT_LT((got - base).cwiseAbs().maxCoeff(), 1e-10) << text << " standardize=" << standardize;
      }
    }
  }
}

TEST(Regressor, ConstantNeedsNoData) {
  const auto m = fit(RegressorSpec::constant_with(2.5), Eigen::MatrixXd(0, 3), Eigen::VectorXd(0));
  EXPECT_EQ(m.predict(Eigen::RowVectorXd::Zero(3)), 2.5);
  EXPECT_THROW(fit(RegressorSpec::ols(), Eigen::MatrixXd(0, 3), Eigen::VectorXd(0)), InvalidConfiguration);
}
