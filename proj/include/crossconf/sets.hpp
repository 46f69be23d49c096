#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crossconf/combiners.hpp"
#include "crossconf/data.hpp"
#include "crossconf/prediction_set.hpp"
#include "crossconf/pvalues.hpp"
#include "crossconf/scores.hpp"

namespace crossconf {

/// Prediction-set procedures. The `*_cross` variants are the `*_mod` rules
/// thresholded at alpha' instead of alpha.
enum class Method {
  mod,
  e_mod,
  u_mod,
  eu_mod,
  cross,
  e_cross,
  u_cross,
  eu_cross,
  split,
  split_2alpha,
  cv_plus,
};

std::string method_name(Method method);
Method parse_method(std::string_view name);
/// Comma-separated list, e.g. "mod,e-mod,cross".
std::vector<Method> parse_methods(std::string_view list);
/// Methods that consume the U draw.
bool uses_u(Method method);

/// Deterministic rank p-values or tau-smoothed ones.
enum class PValueKind { deterministic, smoothed };

/// inf{a : (1/n) #{z_i <= a} >= gamma}. +inf when gamma > 1, -inf when
/// gamma <= 0. gamma * n within 1e-12 (relative) of an integer is taken as
/// that integer so levels like (1 - a)(1 + 1/n) hit the intended rank.
double empirical_quantile(std::span<const double> z, double gamma);

/// (1 - alpha)(1 + 1/n).
double conformal_level(double alpha, std::size_t n);

/// Split conformal: model trained on one half, scores on the other.
struct SplitState {
  std::vector<std::size_t> train;
  std::vector<std::size_t> calibration;
  FittedModel model;
  ScoreFunctionSpec spec;
  std::vector<double> calibration_scores;  // sorted ascending
};

/// Random 50/50 split (floor(n/2) training rows) drawn from the split substream.
SplitState fit_split(const Dataset& data, const ScoreFunctionSpec& spec, const RandomSource& rng);

/// (1 + #{i in cal : s(x, y) <= S_i}) / (|cal| + 1).
double split_pvalue(const SplitState& split, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y);

/// mu(x) +/- quantile(S; (1 - alpha)(1 + 1/|cal|)); whole line when that level exceeds one.
PredictionSet split_set(const SplitState& split, const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha);
PredictionSet split_set(const Dataset& data, const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha,
                        const ScoreFunctionSpec& spec, const RandomSource& rng);

/// Pooled-count membership (1 + #{i : s_{k(i)}(y) <= S_i}) / (n + 1) > alpha.
bool cross_member_direct(const CalibratedQuery& query, double alpha, double y);
/// Same set through the weighted fold p-values:
/// sum_k w_k P_k(y) > alpha + (1 - alpha)(K - 1)/(n + K).
bool cross_member_weighted(const CalibratedQuery& query, double alpha, double y);

PredictionSet cross_set_direct(const CalibratedQuery& query, double alpha);
PredictionSet cross_set_direct(const Dataset& data, const FoldAssignment& folds,
                               const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha,
                               const ScoreFunctionSpec& spec);

/// statistic(P(y)) > threshold, with smoothed p-values taking tau from `combiner.draws`.
bool variant_member(const CalibratedQuery& query, const CombinerSpec& combiner, PValueKind kind, double y);

PredictionSet variant_set(const CalibratedQuery& query, const CombinerSpec& combiner,
                          PValueKind kind = PValueKind::deterministic);
PredictionSet variant_set(const Dataset& data, const FoldAssignment& folds,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x, const ScoreFunctionSpec& spec,
                          const CombinerSpec& combiner, PValueKind kind = PValueKind::deterministic);

/// K-fold CV+ interval; K = n gives the jackknife+.
PredictionSet cv_plus_set(const CalibratedQuery& query, double alpha);
PredictionSet cv_plus_set(const Dataset& data, const FoldAssignment& folds,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha, const RegressorSpec& regressor);

/// Combiner realizing a cross-family method (not split, cross or cv_plus).
/// Throws InvalidConfiguration for e-cross / eu-cross on unequal folds, whose
/// weighted average is not an exchangeable merge.
CombinerSpec combiner_for(Method method, double alpha, const CalibratedQuery& query,
                          const std::optional<RandomDraws>& draws);

/// Threshold a method is run at: alpha, 2 alpha (split_2alpha) or alpha'.
double alpha_used(Method method, double alpha, std::size_t K, std::size_t n);

struct MethodConfig {
  double alpha = 0.1;
  std::vector<Method> methods;
  PValueKind pvalues = PValueKind::deterministic;
  bool hull = false;
};

/// Sets for every configured method at one test row. `split` may be null
/// when no split method is requested. All methods share `draws`.
std::vector<std::pair<Method, PredictionSet>> predict_sets(const CalibratedQuery& query, const SplitState* split,
                                                           const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                                           const MethodConfig& config, const RandomDraws& draws);

}  // namespace crossconf
