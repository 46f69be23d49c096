#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "crossconf/data.hpp"
#include "crossconf/regression.hpp"

namespace crossconf {

/// Nonconformity score s((x, y); D). Only the absolute residual
/// |y - mu_D(x)| is implemented; `kind` is the extension point.
struct ScoreFunctionSpec {
  enum class Kind { residual };

  Kind kind = Kind::residual;
  RegressorSpec regressor;

  double score(double y, double prediction) const { return std::abs(y - prediction); }
};

/// Cross-validation scores: point i is scored by the model trained on every
/// used point outside its fold. Holds the K fold models for reuse at test time.
class CvScores {
 public:
  CvScores(FoldAssignment folds, ScoreFunctionSpec spec, std::vector<FittedModel> models,
           std::vector<double> scores);

  const FoldAssignment& folds() const { return folds_; }
  const ScoreFunctionSpec& spec() const { return spec_; }
  const FittedModel& model(std::size_t k) const { return models_.at(k); }

  /// Score of point i; NaN for discarded points.
  double score(std::size_t i) const { return scores_.at(i); }
  const std::vector<double>& all_scores() const { return scores_; }

  /// Scores of fold k's members in member order.
  std::vector<double> fold_scores(std::size_t k) const;
  /// Fold k's scores sorted ascending (cached).
  const std::vector<double>& sorted_fold_scores(std::size_t k) const { return sorted_.at(k); }

 private:
  FoldAssignment folds_;
  ScoreFunctionSpec spec_;
  std::vector<FittedModel> models_;
  std::vector<double> scores_;
  std::vector<std::vector<double>> sorted_;
};

/// Fits one model per fold on its complement and scores the fold's members.
/// Throws InvalidConfiguration when a complement is empty and the regressor
/// needs data.
CvScores compute_cv_scores(const Dataset& data, const FoldAssignment& folds, const ScoreFunctionSpec& spec);

/// Score of a candidate (x, y) under fold k's cached complement model.
double test_score(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y, std::size_t fold, const CvScores& cv);

}  // namespace crossconf
