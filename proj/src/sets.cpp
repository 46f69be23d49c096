#include "crossconf/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTolerance = 1e-12;

struct MethodEntry {
  Method method;
  std::string_view name;
};

constexpr MethodEntry kMethods[] = {
    {Method::mod, "mod"},           {Method::e_mod, "e-mod"},
    {Method::u_mod, "u-mod"},       {Method::eu_mod, "eu-mod"},
    {Method::cross, "cross"},       {Method::e_cross, "e-cross"},
    {Method::u_cross, "u-cross"},   {Method::eu_cross, "eu-cross"},
    {Method::split, "split"},       {Method::split_2alpha, "split-2alpha"},
    {Method::cv_plus, "cv-plus"},
};

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfiguration("alpha must lie in (0, 1)");
}

std::optional<double> tau_for(const CombinerSpec& combiner, PValueKind kind) {
  if (kind == PValueKind::deterministic) return std::nullopt;
  if (!combiner.draws) throw InvalidConfiguration("smoothed p-values need a tau draw");
  return combiner.draws->tau;
}

PredictionSet finish(PredictionSet set, bool hull) { return hull ? set.hull() : set; }

}  // namespace

std::string method_name(Method method) {
  for (const auto& e : kMethods) {
    if (e.method == method) return std::string(e.name);
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (const auto& e : kMethods) {
    if (e.name == name) return e.method;
  }
  throw InvalidConfiguration("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto token = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!token.empty()) {
      const Method m = parse_method(token);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidConfiguration("method list is empty");
  return out;
}

bool uses_u(Method method) {
  return method == Method::u_mod || method == Method::eu_mod || method == Method::u_cross ||
         method == Method::eu_cross;
}

double empirical_quantile(std::span<const double> z, double gamma) {
  if (z.empty()) throw InvalidConfiguration("quantile of an empty sample");
  if (std::isnan(gamma)) throw InvalidConfiguration("quantile level is NaN");
  if (gamma <= 0.0) return -kInf;
  const double n = static_cast<double>(z.size());
  const double target = gamma * n;
  const double rank = std::ceil(target - kRankTolerance * target);
  if (rank > n) return kInf;
  const auto r = static_cast<std::size_t>(std::max(rank, 1.0));
  std::vector<double> sorted(z.begin(), z.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(r - 1), sorted.end());
  return sorted[r - 1];
}

double conformal_level(double alpha, std::size_t n) {
  return (1.0 - alpha) * (1.0 + 1.0 / static_cast<double>(n));
}

SplitState fit_split(const Dataset& data, const ScoreFunctionSpec& spec, const RandomSource& rng) {
  const std::size_t n = data.size();
  if (n < 2) throw InvalidConfiguration("split conformal needs n >= 2");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine engine = rng.engine(Substream::split);
  std::shuffle(order.begin(), order.end(), engine);
  const std::size_t n_train = n / 2;
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> cal(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(cal.begin(), cal.end());

  FittedModel model = fit(spec.regressor, data.feature_rows(train), data.response_rows(train));
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (std::size_t i : cal) {
    const auto row = static_cast<Eigen::Index>(i);
    scores.push_back(spec.score(data.responses()(row), model.predict(data.features().row(row))));
  }
  std::sort(scores.begin(), scores.end());
  return SplitState{std::move(train), std::move(cal), std::move(model), spec, std::move(scores)};
}

double split_pvalue(const SplitState& split, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) {
  const double s = split.spec.score(y, split.model.predict(x));
  const auto& sc = split.calibration_scores;
  const auto at_least = static_cast<std::size_t>(sc.end() - std::lower_bound(sc.begin(), sc.end(), s));
  return pvalue_from_counts(at_least, sc.size());
}

PredictionSet split_set(const SplitState& split, const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha) {
  require_alpha(alpha);
  const double q = empirical_quantile(split.calibration_scores, conformal_level(alpha, split.calibration_scores.size()));
  if (std::isinf(q)) return PredictionSet::whole_line();
  const double center = split.model.predict(x);
  return PredictionSet::closed(center - q, center + q);
}

PredictionSet split_set(const Dataset& data, const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha,
                        const ScoreFunctionSpec& spec, const RandomSource& rng) {
  return split_set(fit_split(data, spec, rng), x, alpha);
}

bool cross_member_direct(const CalibratedQuery& query, double alpha, double y) {
  const double n = static_cast<double>(query.used_points());
  return static_cast<double>(1 + query.pooled_count(y)) / (n + 1.0) > alpha;
}

bool cross_member_weighted(const CalibratedQuery& query, double alpha, double y) {
  const PValueVector p = query.pvalues(y);
  const FoldWeights w = fold_weights(p.fold_sizes);
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += w.weights[k] * p.values[k];
  return sum > alpha_prime(alpha, query.folds(), query.used_points());
}

PredictionSet cross_set_direct(const CalibratedQuery& query, double alpha) {
  require_alpha(alpha);
  const auto candidates = query.breakpoints();
  return endpoint_scan(candidates, [&](double y) { return cross_member_direct(query, alpha, y); });
}

PredictionSet cross_set_direct(const Dataset& data, const FoldAssignment& folds,
                               const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha,
                               const ScoreFunctionSpec& spec) {
  const CvScores cv = compute_cv_scores(data, folds, spec);
  return cross_set_direct(CalibratedQuery(cv, x), alpha);
}

bool variant_member(const CalibratedQuery& query, const CombinerSpec& combiner, PValueKind kind, double y) {
  return evaluate(combiner, query.pvalues(y, tau_for(combiner, kind))).included;
}

PredictionSet variant_set(const CalibratedQuery& query, const CombinerSpec& combiner, PValueKind kind) {
  if (!(combiner.threshold > 0.0)) throw InvalidConfiguration("combiner threshold must be positive");
  if (combiner.threshold >= 1.0) {
    // No p-value statistic exceeds 1, so nothing is ever included.
    return PredictionSet::empty();
  }
  const auto tau = tau_for(combiner, kind);
  const auto candidates = query.breakpoints();
  return endpoint_scan(candidates, [&](double y) { return evaluate(combiner, query.pvalues(y, tau)).included; });
}

PredictionSet variant_set(const Dataset& data, const FoldAssignment& folds,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x, const ScoreFunctionSpec& spec,
                          const CombinerSpec& combiner, PValueKind kind) {
  const CvScores cv = compute_cv_scores(data, folds, spec);
  return variant_set(CalibratedQuery(cv, x), combiner, kind);
}

PredictionSet cv_plus_set(const CalibratedQuery& query, double alpha) {
  require_alpha(alpha);
  const CvScores& cv = query.cv();
  const std::size_t n = query.used_points();
  std::vector<double> upper;
  std::vector<double> negated_lower;
  upper.reserve(n);
  negated_lower.reserve(n);
  for (std::size_t k = 0; k < query.folds(); ++k) {
    const double mu = query.center(k);
    for (double s : cv.sorted_fold_scores(k)) {
      upper.push_back(mu + s);
      negated_lower.push_back(-(mu - s));
    }
  }
  const double level = conformal_level(alpha, n);
  const double hi = empirical_quantile(upper, level);
  const double lo = -empirical_quantile(negated_lower, level);
  if (std::isinf(hi) || std::isinf(lo)) return PredictionSet::whole_line();
  if (lo > hi) return PredictionSet::empty();
  return PredictionSet::closed(lo, hi);
}

PredictionSet cv_plus_set(const Dataset& data, const FoldAssignment& folds,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha, const RegressorSpec& regressor) {
  ScoreFunctionSpec spec;
  spec.regressor = regressor;
  const CvScores cv = compute_cv_scores(data, folds, spec);
  return cv_plus_set(CalibratedQuery(cv, x), alpha);
}

CombinerSpec combiner_for(Method method, double alpha, const CalibratedQuery& query,
                          const std::optional<RandomDraws>& draws) {
  require_alpha(alpha);
  CombinerSpec spec;
  spec.draws = draws;
  const bool equal = query.equal_sizes();
  switch (method) {
    case Method::mod: spec.kind = CombinerKind::mod; break;
    case Method::e_mod: spec.kind = CombinerKind::e_mod; break;
    case Method::u_mod: spec.kind = CombinerKind::u_mod; break;
    case Method::eu_mod: spec.kind = CombinerKind::eu_mod; break;
    case Method::e_cross:
    case Method::eu_cross:
      if (!equal) {
        throw InvalidConfiguration(method_name(method) +
                                   " requires equal fold sizes; only u-cross is valid with varying folds");
      }
      spec.kind = method == Method::e_cross ? CombinerKind::e_mod : CombinerKind::eu_mod;
      break;
    case Method::u_cross:
      spec.kind = CombinerKind::u_mod;
      spec.averaging = Averaging::fold_size;
      break;
    default:
      throw InvalidConfiguration(method_name(method) + " is not a p-value combination method");
  }
  spec.threshold = alpha_used(method, alpha, query.folds(), query.used_points());
  if (uses_u(method) && !draws) throw InvalidConfiguration(method_name(method) + " needs a U draw");
  return spec;
}

double alpha_used(Method method, double alpha, std::size_t K, std::size_t n) {
  switch (method) {
    case Method::e_cross:
    case Method::u_cross:
    case Method::eu_cross:
      return alpha_prime(alpha, K, n);
    case Method::split_2alpha:
      return 2.0 * alpha;
    default:
      return alpha;
  }
}

std::vector<std::pair<Method, PredictionSet>> predict_sets(const CalibratedQuery& query, const SplitState* split,
                                                           const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                                           const MethodConfig& config, const RandomDraws& draws) {
  require_alpha(config.alpha);
  std::vector<std::pair<Method, PredictionSet>> out;
  out.reserve(config.methods.size());
  for (Method m : config.methods) {
    PredictionSet set;
    switch (m) {
      case Method::cross:
        set = cross_set_direct(query, config.alpha);
        break;
      case Method::cv_plus:
        set = cv_plus_set(query, config.alpha);
        break;
      case Method::split:
      case Method::split_2alpha:
        if (m == Method::split_2alpha && config.alpha >= 0.5) {
          throw InvalidConfiguration("split-2alpha needs alpha < 0.5");
        }
        if (split == nullptr) throw InvalidConfiguration("split methods need a fitted split");
        set = split_set(*split, x, alpha_used(m, config.alpha, 1, 1));
        break;
      default:
        set = variant_set(query, combiner_for(m, config.alpha, query, draws), config.pvalues);
        break;
    }
    out.emplace_back(m, finish(std::move(set), config.hull));
  }
  return out;
}

}  // namespace crossconf
