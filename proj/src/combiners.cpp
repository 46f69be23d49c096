#include "crossconf/combiners.hpp"

#include <algorithm>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

void require_nonempty(std::span<const double> p) {
  if (p.empty()) throw InvalidConfiguration("need at least one p-value");
}

void require_u(double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidConfiguration("U must lie in (0, 1)");
}

const RandomDraws& require_draws(const CombinerSpec& spec) {
  if (!spec.draws) throw InvalidConfiguration(to_string(spec.kind) + " needs a U draw");
  return *spec.draws;
}

double average(const CombinerSpec& spec, const PValueVector& p) {
  if (spec.averaging == Averaging::fold_size) {
    const FoldWeights w = fold_weights(p.fold_sizes);
    return stat_weighted(p.values, w.weights);
  }
  return stat_mod(p.values);
}

}  // namespace

double stat_mod(std::span<const double> p) {
  require_nonempty(p);
  double sum = 0.0;
  for (double v : p) sum += v;
  return sum / static_cast<double>(p.size());
}

double stat_emod(std::span<const double> p) {
  require_nonempty(p);
  // Same accumulation as stat_mod so the l = K term is bit-identical to it.
  double sum = 0.0;
  double best = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    sum += p[l];
    const double mean = sum / static_cast<double>(l + 1);
    best = l == 0 ? mean : std::min(best, mean);
  }
  return best;
}

double stat_umod(std::span<const double> p, double u) {
  require_u(u);
  return stat_mod(p) / (2.0 - u);
}

double stat_eumod(std::span<const double> p, double u) {
  require_u(u);
  require_nonempty(p);
  return std::min(p[0] / (2.0 - u), stat_emod(p));
}

double stat_weighted(std::span<const double> p, std::span<const double> weights) {
  require_nonempty(p);
  if (weights.size() != p.size()) throw InvalidConfiguration("weight count does not match p-value count");
  if (std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights[0]; })) {
    return stat_mod(p);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += weights[k] * p[k];
  return sum;
}

double statistic(const CombinerSpec& spec, const PValueVector& p) {
  switch (spec.kind) {
    case CombinerKind::mod:
      return average(spec, p);
    case CombinerKind::e_mod:
      return stat_emod(p.values);
    case CombinerKind::u_mod: {
      const double u = require_draws(spec).u;
      require_u(u);
      return average(spec, p) / (2.0 - u);
    }
    case CombinerKind::eu_mod:
      return stat_eumod(p.values, require_draws(spec).u);
  }
  throw InvalidConfiguration("unhandled combiner kind");
}

MembershipVerdict evaluate(const CombinerSpec& spec, const PValueVector& p) {
  const double stat = statistic(spec, p);
  return {stat, stat > spec.threshold};
}

double alpha_prime(double alpha, std::size_t K, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfiguration("alpha must lie in (0, 1)");
  if (K == 0 || n < K) throw InvalidConfiguration("alpha' needs 1 <= K <= n");
  return alpha + (1.0 - alpha) * static_cast<double>(K - 1) / static_cast<double>(K + n);
}

CoverageBounds coverage_bounds(double alpha, std::size_t K, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfiguration("alpha must lie in (0, 1)");
  if (K == 0 || n < K) throw InvalidConfiguration("coverage bounds need 1 <= K <= n");
  const double k = static_cast<double>(K);
  const double nn = static_cast<double>(n);
  const double base = 1.0 - 2.0 * alpha;
  CoverageBounds b{};
  b.small_k = base - 2.0 * (1.0 - alpha) * (1.0 - 1.0 / k) / (nn / k + 1.0);
  // K == n zeroes the correction; keep that case exact.
  b.large_k = K == n ? base : base - 2.0 * (1.0 - alpha) * (1.0 - k / nn) / (k + 1.0);
  b.combined = std::max(b.small_k, b.large_k);
  return b;
}

bool informative(double alpha, std::size_t fold_size) {
  return 1.0 < alpha * static_cast<double>(fold_size + 1);
}

std::string to_string(CombinerKind kind) {
  switch (kind) {
    case CombinerKind::mod: return "mod";
    case CombinerKind::e_mod: return "e-mod";
    case CombinerKind::u_mod: return "u-mod";
    case CombinerKind::eu_mod: return "eu-mod";
  }
  return "?";
}

}  // namespace crossconf
