#include "crossconf/regression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

constexpr double kRelativeSingularCutoff = 1e-10;

void require_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    throw InvalidData("training features have " + std::to_string(x.rows()) + " rows but " +
                      std::to_string(y.size()) + " responses");
  }
  if (!x.allFinite() || !y.allFinite()) throw InvalidData("training data contains non-finite values");
}

// V * diag(f(sigma)) * U' * y with f(s) = s / (s^2 + lambda) above the cutoff.
Eigen::VectorXd svd_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double cutoff = std::max(sigma_max * kRelativeSingularCutoff, std::numeric_limits<double>::min());
  Eigen::VectorXd uty = svd.matrixU().transpose() * y;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double s = sigma(i);
    uty(i) = s > cutoff ? uty(i) * s / (s * s + lambda) : 0.0;
  }
  Eigen::VectorXd beta = svd.matrixV() * uty;
  if (!beta.allFinite()) throw NumericalFailure("least-squares solve produced non-finite coefficients");
  return beta;
}

struct Standardization {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
};

Standardization standardization_of(const Eigen::MatrixXd& x) {
  Standardization s;
  const double n = static_cast<double>(x.rows());
  s.center = x.colwise().sum().transpose() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.center(j)).square().sum() / n;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd apply(const Standardization& s, const Eigen::MatrixXd& x) {
  return (x.rowwise() - s.center.transpose()).array().rowwise() / s.scale.transpose().array();
}

FittedModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, bool standardize) {
  require_finite(x, y);
  if (x.rows() == 0) throw InvalidConfiguration("cannot fit a linear model on an empty training set");
  LinearModel model;
  if (standardize) {
    Standardization s = standardization_of(x);
    model.intercept = y.mean();
    Eigen::VectorXd centered = y.array() - model.intercept;
    model.coefficients = svd_solve(apply(s, x), centered, lambda);
    model.center = std::move(s.center);
    model.scale = std::move(s.scale);
  } else {
    model.coefficients = svd_solve(x, y, lambda);
  }
  return FittedModel(std::move(model));
}

FittedModel fit_neighbors(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k, bool standardize) {
  require_finite(x, y);
  if (k == 0) throw InvalidConfiguration("k-NN needs k >= 1");
  if (k > static_cast<std::size_t>(x.rows())) {
    throw InvalidConfiguration("k-NN k=" + std::to_string(k) + " exceeds training size " +
                               std::to_string(x.rows()));
  }
  NeighborModel model;
  model.k = k;
  model.responses = y;
  if (standardize) {
    Standardization s = standardization_of(x);
    model.features = apply(s, x);
    model.center = std::move(s.center);
    model.scale = std::move(s.scale);
  } else {
    model.features = x;
  }
  return FittedModel(std::move(model));
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw InvalidConfiguration("bad " + std::string(what) + " value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

RegressorSpec RegressorSpec::ridge_with(double lambda) {
  if (!(lambda >= 0.0)) throw InvalidConfiguration("ridge lambda must be >= 0");
  RegressorSpec spec;
  spec.kind = Kind::ridge;
  spec.lambda = lambda;
  return spec;
}

RegressorSpec RegressorSpec::knn_with(std::size_t k) {
  if (k == 0) throw InvalidConfiguration("k-NN needs k >= 1");
  RegressorSpec spec;
  spec.kind = Kind::knn;
  spec.k = k;
  return spec;
}

RegressorSpec RegressorSpec::constant_with(double value) {
  RegressorSpec spec;
  spec.kind = Kind::constant;
  spec.constant = value;
  return spec;
}

RegressorSpec RegressorSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "ols") {
    if (!arg.empty()) throw InvalidConfiguration("ols takes no parameter");
    return ols();
  }
  if (name == "ridge") {
    if (arg.empty()) throw InvalidConfiguration("ridge needs a penalty, e.g. ridge:0.2");
    return ridge_with(parse_double(arg, "ridge lambda"));
  }
  if (name == "knn") {
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (arg.empty() || ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw InvalidConfiguration("knn needs a positive integer, e.g. knn:25");
    }
    return knn_with(k);
  }
  if (name == "const") {
    return constant_with(arg.empty() ? 0.0 : parse_double(arg, "constant"));
  }
  throw InvalidConfiguration("unknown regressor '" + std::string(text) + "' (expected ols|ridge:L|knn:K)");
}

std::string RegressorSpec::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::min_norm_least_squares: out << "ols"; break;
    case Kind::ridge: out << "ridge:" << lambda; break;
    case Kind::knn: out << "knn:" << k; break;
    case Kind::constant: out << "const:" << constant; break;
  }
  if (standardize) out << "+std";
  return out.str();
}

double FittedModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (const auto* lin = std::get_if<LinearModel>(&state_)) {
    if (x.size() != lin->coefficients.size()) throw InvalidData("query dimension does not match model");
    if (lin->center.size() == 0) return x.dot(lin->coefficients.transpose());
    Eigen::RowVectorXd z = (x - lin->center.transpose()).cwiseQuotient(lin->scale.transpose());
    return lin->intercept + z.dot(lin->coefficients.transpose());
  }
  if (const auto* nn = std::get_if<NeighborModel>(&state_)) {
    if (x.size() != nn->features.cols()) throw InvalidData("query dimension does not match model");
    Eigen::RowVectorXd query = x;
    if (nn->center.size() != 0) {
      query = (x - nn->center.transpose()).cwiseQuotient(nn->scale.transpose());
    }
    const auto n = static_cast<std::size_t>(nn->features.rows());
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = (nn->features.row(static_cast<Eigen::Index>(i)) - query).squaredNorm();
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) {
      if (dist[a] != dist[b]) return dist[a] < dist[b];
      const double ya = nn->responses(static_cast<Eigen::Index>(a));
      const double yb = nn->responses(static_cast<Eigen::Index>(b));
      if (ya != yb) return ya < yb;
      const auto ra = nn->features.row(static_cast<Eigen::Index>(a));
      const auto rb = nn->features.row(static_cast<Eigen::Index>(b));
      return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    const auto k = static_cast<std::ptrdiff_t>(nn->k);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
    double sum = 0.0;
    for (std::ptrdiff_t j = 0; j < k; ++j) sum += nn->responses(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    return sum / static_cast<double>(nn->k);
  }
  return std::get<ConstantModel>(state_).value;
}

Eigen::VectorXd FittedModel::predict_rows(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(x.row(i));
  return out;
}

const Eigen::VectorXd& FittedModel::coefficients() const {
  const auto* lin = std::get_if<LinearModel>(&state_);
  if (lin == nullptr) throw InvalidConfiguration("model has no coefficient vector");
  return lin->coefficients;
}

FittedModel fit_min_norm_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return fit_linear(x, y, 0.0, false);
}

FittedModel fit_min_norm_ols(const Dataset& train) {
  return fit_min_norm_ols(train.features(), train.responses());
}

FittedModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidConfiguration("ridge lambda must be >= 0");
  return fit_linear(x, y, lambda, false);
}

FittedModel fit_ridge(const Dataset& train, double lambda) {
  return fit_ridge(train.features(), train.responses(), lambda);
}

FittedModel fit_knn(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k) {
  return fit_neighbors(x, y, k, false);
}

FittedModel fit_knn(const Dataset& train, std::size_t k) {
  return fit_knn(train.features(), train.responses(), k);
}

FittedModel fit(const RegressorSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  switch (spec.kind) {
    case RegressorSpec::Kind::min_norm_least_squares:
      return fit_linear(x, y, 0.0, spec.standardize);
    case RegressorSpec::Kind::ridge:
      if (!(spec.lambda >= 0.0)) throw InvalidConfiguration("ridge lambda must be >= 0");
      return fit_linear(x, y, spec.lambda, spec.standardize);
    case RegressorSpec::Kind::knn:
      return fit_neighbors(x, y, spec.k, spec.standardize);
    case RegressorSpec::Kind::constant:
      return FittedModel(ConstantModel{spec.constant});
  }
  throw InvalidConfiguration("unhandled regressor kind");
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& x) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double cutoff = std::max(sigma_max * kRelativeSingularCutoff, std::numeric_limits<double>::min());
  Eigen::VectorXd inv(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) inv(i) = sigma(i) > cutoff ? 1.0 / sigma(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace crossconf
