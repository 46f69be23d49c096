#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "crossconf/data.hpp"

namespace crossconf {

/// Which symmetric learning algorithm to run on a training set.
///
/// Every kind is invariant to the order of training rows: permuting the rows
/// yields the same predictions up to floating-point rounding.
struct RegressorSpec {
  enum class Kind {
    min_norm_least_squares,  // "ols"
    ridge,                   // "ridge:<lambda>"
    knn,                     // "knn:<k>"
    constant,                // "const:<value>", ignores the data
  };

  Kind kind = Kind::min_norm_least_squares;
  double lambda = 0.0;
  std::size_t k = 1;
  double constant = 0.0;
  /// z-score features (and center the response for linear kinds) using the
  /// training set's own moments.
  bool standardize = false;

  static RegressorSpec ols() { return {}; }
  static RegressorSpec ridge_with(double lambda);
  static RegressorSpec knn_with(std::size_t k);
  static RegressorSpec constant_with(double value);

  /// Parses `ols`, `ridge:0.2`, `knn:25`, `const:0`.
  static RegressorSpec parse(std::string_view text);
  std::string to_string() const;

  /// Whether fitting needs at least one training row.
  bool needs_data() const { return kind != Kind::constant; }
};

/// Linear predictor x -> intercept + (x - center) / scale . coefficients.
struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  Eigen::VectorXd center;  // empty when not standardized
  Eigen::VectorXd scale;
};

/// Retained training set for nearest-neighbour averaging.
struct NeighborModel {
  Eigen::MatrixXd features;
  Eigen::VectorXd responses;
  std::size_t k = 1;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
};

struct ConstantModel {
  double value = 0.0;
};

/// Immutable fitted regression function.
class FittedModel {
 public:
  using State = std::variant<LinearModel, NeighborModel, ConstantModel>;

  explicit FittedModel(State state) : state_(std::move(state)) {}

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& x) const;

  const State& state() const { return state_; }
  /// Coefficient vector for linear models (on the standardized scale if any).
  const Eigen::VectorXd& coefficients() const;

 private:
  State state_;
};

/// Minimum-norm least squares, beta = pinv(X) y. Singular values below
/// 1e-10 times the largest are treated as zero.
FittedModel fit_min_norm_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
FittedModel fit_min_norm_ols(const Dataset& train);

/// beta = (X'X + lambda I)^-1 X'y, computed through the SVD; lambda = 0 gives
/// the minimum-norm solution.
FittedModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);
FittedModel fit_ridge(const Dataset& train, double lambda);

/// Mean response of the k nearest rows (Euclidean). Distance ties are broken
/// by smaller response, then lexicographically smaller features, so the
/// result never depends on row order.
FittedModel fit_knn(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k);
FittedModel fit_knn(const Dataset& train, std::size_t k);

/// Dispatch on `spec`. `x` may have zero rows only for data-free kinds.
FittedModel fit(const RegressorSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Moore-Penrose pseudoinverse with the same relative cutoff as the OLS fit.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& x);

}  // namespace crossconf
