#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "crossconf/random.hpp"
#include "crossconf/scores.hpp"

namespace crossconf {

/// Rank p-value (1 + #{i : test_score <= S_i}) / (m + 1).
double fold_pvalue(double test_score, std::span<const double> fold_scores);

/// Smoothed p-value (tau + tau * #{test_score == S_i} + #{test_score < S_i}) / (m + 1).
/// Ties are exact floating-point equality. Throws unless 0 < tau < 1.
double fold_pvalue_randomized(double test_score, std::span<const double> fold_scores, double tau);

/// The two formulas above, from counts. Shared by the linear and sorted paths
/// so both produce bit-identical values.
inline double pvalue_from_counts(std::size_t at_least, std::size_t m) {
  return static_cast<double>(1 + at_least) / static_cast<double>(m + 1);
}
inline double randomized_pvalue_from_counts(std::size_t equal, std::size_t greater, std::size_t m, double tau) {
  return (tau + tau * static_cast<double>(equal) + static_cast<double>(greater)) / static_cast<double>(m + 1);
}

/// Fold p-values P_1(y), ..., P_K(y) in fold-index order.
struct PValueVector {
  std::vector<double> values;
  std::vector<std::size_t> fold_sizes;
  bool randomized = false;
  std::optional<double> tau;

  std::size_t size() const { return values.size(); }
  bool equal_sizes() const;
};

/// Weights (m_k + 1) / (n + K) of the pooled cross-conformal count.
struct FoldWeights {
  std::vector<double> weights;
};

FoldWeights fold_weights(std::span<const std::size_t> fold_sizes);

/// Reference evaluation: refits nothing, but scans every fold's scores
/// linearly. With `draws`, uses the smoothed p-values with the shared tau.
PValueVector all_fold_pvalues(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y, const CvScores& cv,
                              const std::optional<RandomDraws>& draws = std::nullopt);

/// Cross-validation scores bound to one test row. Caches the K fold
/// predictions so evaluating a candidate y costs O(K log m).
///
/// Keeps a reference to `cv`, which must outlive the query.
class CalibratedQuery {
 public:
  CalibratedQuery(const CvScores& cv, const Eigen::Ref<const Eigen::RowVectorXd>& x);

  const CvScores& cv() const { return *cv_; }
  std::size_t folds() const { return centers_.size(); }
  /// Points contributing scores (n with discards removed).
  std::size_t used_points() const { return cv_->folds().used_points(); }
  std::size_t fold_size(std::size_t k) const { return cv_->sorted_fold_scores(k).size(); }
  bool equal_sizes() const { return cv_->folds().equal_sizes(); }

  /// Fold k model's prediction at the test row.
  double center(std::size_t k) const { return centers_.at(k); }
  double test_score(std::size_t k, double y) const { return cv_->spec().score(y, centers_[k]); }

  /// #{i in fold k : s_k(y) <= S_i}.
  std::size_t count_at_least(std::size_t k, double y) const;

  PValueVector pvalues(double y, const std::optional<double>& tau = std::nullopt) const;

  /// #{i : s_{k(i)}(y) <= S_i} over all used points.
  std::size_t pooled_count(double y) const;

  /// Sorted, de-duplicated points mu_k(x) -/+ S_i where some indicator flips.
  std::vector<double> breakpoints() const;

 private:
  const CvScores* cv_;
  std::vector<double> centers_;
};

}  // namespace crossconf
