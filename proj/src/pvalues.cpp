#include "crossconf/pvalues.hpp"

#include <algorithm>

#include "crossconf/errors.hpp"

namespace crossconf {

double fold_pvalue(double test_score, std::span<const double> fold_scores) {
  std::size_t at_least = 0;
  for (double s : fold_scores) {
    if (test_score <= s) ++at_least;
  }
  return pvalue_from_counts(at_least, fold_scores.size());
}

double fold_pvalue_randomized(double test_score, std::span<const double> fold_scores, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidConfiguration("tau must lie in (0, 1)");
  std::size_t equal = 0;
  std::size_t greater = 0;
  for (double s : fold_scores) {
    if (test_score == s) {
      ++equal;
    } else if (test_score < s) {
      ++greater;
    }
  }
  return randomized_pvalue_from_counts(equal, greater, fold_scores.size(), tau);
}

bool PValueVector::equal_sizes() const {
  return std::all_of(fold_sizes.begin(), fold_sizes.end(), [&](std::size_t m) { return m == fold_sizes.front(); });
}

FoldWeights fold_weights(std::span<const std::size_t> fold_sizes) {
  if (fold_sizes.empty()) throw InvalidConfiguration("fold weights need at least one fold");
  std::size_t n = 0;
  for (std::size_t m : fold_sizes) {
    if (m == 0) throw InvalidConfiguration("fold sizes must be >= 1");
    n += m;
  }
  FoldWeights w;
  w.weights.reserve(fold_sizes.size());
  const auto k = fold_sizes.size();
  const bool equal = std::all_of(fold_sizes.begin(), fold_sizes.end(), [&](std::size_t m) { return m == fold_sizes[0]; });
  for (std::size_t m : fold_sizes) {
    w.weights.push_back(equal ? 1.0 / static_cast<double>(k)
                              : static_cast<double>(m + 1) / static_cast<double>(n + k));
  }
  return w;
}

PValueVector all_fold_pvalues(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y, const CvScores& cv,
                              const std::optional<RandomDraws>& draws) {
  PValueVector out;
  out.randomized = draws.has_value();
  if (draws) out.tau = draws->tau;
  const std::size_t K = cv.folds().folds();
  out.values.reserve(K);
  out.fold_sizes.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double s = test_score(x, y, k, cv);
    const auto scores = cv.fold_scores(k);
    out.values.push_back(draws ? fold_pvalue_randomized(s, scores, draws->tau) : fold_pvalue(s, scores));
    out.fold_sizes.push_back(scores.size());
  }
  return out;
}

CalibratedQuery::CalibratedQuery(const CvScores& cv, const Eigen::Ref<const Eigen::RowVectorXd>& x) : cv_(&cv) {
  const std::size_t K = cv.folds().folds();
  centers_.reserve(K);
  for (std::size_t k = 0; k < K; ++k) centers_.push_back(cv.model(k).predict(x));
}

std::size_t CalibratedQuery::count_at_least(std::size_t k, double y) const {
  const auto& sorted = cv_->sorted_fold_scores(k);
  const double s = test_score(k, y);
  return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s));
}

PValueVector CalibratedQuery::pvalues(double y, const std::optional<double>& tau) const {
  if (tau && !(*tau > 0.0 && *tau < 1.0)) throw InvalidConfiguration("tau must lie in (0, 1)");
  PValueVector out;
  out.randomized = tau.has_value();
  out.tau = tau;
  const std::size_t K = centers_.size();
  out.values.reserve(K);
  out.fold_sizes.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& sorted = cv_->sorted_fold_scores(k);
    const double s = test_score(k, y);
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), s);
    const std::size_t m = sorted.size();
    if (tau) {
      const auto hi = std::upper_bound(lo, sorted.end(), s);
      out.values.push_back(randomized_pvalue_from_counts(static_cast<std::size_t>(hi - lo),
                                                         static_cast<std::size_t>(sorted.end() - hi), m, *tau));
    } else {
      out.values.push_back(pvalue_from_counts(static_cast<std::size_t>(sorted.end() - lo), m));
    }
    out.fold_sizes.push_back(m);
  }
  return out;
}

std::size_t CalibratedQuery::pooled_count(double y) const {
  std::size_t total = 0;
  for (std::size_t k = 0; k < centers_.size(); ++k) total += count_at_least(k, y);
  return total;
}

std::vector<double> CalibratedQuery::breakpoints() const {
  std::vector<double> points;
  points.reserve(2 * used_points());
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    for (double s : cv_->sorted_fold_scores(k)) {
      points.push_back(centers_[k] - s);
      points.push_back(centers_[k] + s);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

}  // namespace crossconf
