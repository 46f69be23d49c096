#include "crossconf/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossconf/errors.hpp"

namespace crossconf {

CvScores::CvScores(FoldAssignment folds, ScoreFunctionSpec spec, std::vector<FittedModel> models,
                   std::vector<double> scores)
    : folds_(std::move(folds)), spec_(std::move(spec)), models_(std::move(models)), scores_(std::move(scores)) {
  if (models_.size() != folds_.folds()) throw InvalidConfiguration("one model per fold required");
  if (scores_.size() != folds_.total_points()) throw InvalidConfiguration("score vector length mismatch");
  sorted_.reserve(folds_.folds());
  for (std::size_t k = 0; k < folds_.folds(); ++k) {
    auto s = fold_scores(k);
    std::sort(s.begin(), s.end());
    sorted_.push_back(std::move(s));
  }
}

std::vector<double> CvScores::fold_scores(std::size_t k) const {
  const auto& members = folds_.members(k);
  std::vector<double> out;
  out.reserve(members.size());
  for (std::size_t i : members) out.push_back(scores_[i]);
  return out;
}

CvScores compute_cv_scores(const Dataset& data, const FoldAssignment& folds, const ScoreFunctionSpec& spec) {
  if (folds.total_points() != data.size()) {
    throw InvalidConfiguration("fold assignment covers " + std::to_string(folds.total_points()) +
                               " points but dataset has " + std::to_string(data.size()));
  }
  std::vector<FittedModel> models;
  models.reserve(folds.folds());
  std::vector<double> scores(data.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < folds.folds(); ++k) {
    const auto train = folds.complement(k);
    if (train.empty() && spec.regressor.needs_data()) {
      throw InvalidConfiguration("fold " + std::to_string(k) + " has an empty complement; need K >= 2");
    }
    FittedModel model = fit(spec.regressor, data.feature_rows(train), data.response_rows(train));
    for (std::size_t i : folds.members(k)) {
      const auto row = static_cast<Eigen::Index>(i);
      scores[i] = spec.score(data.responses()(row), model.predict(data.features().row(row)));
    }
    models.push_back(std::move(model));
  }
  return CvScores(folds, spec, std::move(models), std::move(scores));
}

double test_score(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y, std::size_t fold, const CvScores& cv) {
  return cv.spec().score(y, cv.model(fold).predict(x));
}

}  // namespace crossconf
