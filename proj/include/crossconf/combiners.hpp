#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "crossconf/pvalues.hpp"
#include "crossconf/random.hpp"

namespace crossconf {

/// How the fold p-values are merged into one statistic.
enum class CombinerKind {
  mod,    // plain average
  e_mod,  // running minimum of prefix averages (uses fold order)
  u_mod,  // average scaled by 1 / (2 - U)
  eu_mod, // min(P_1 / (2 - U), running minimum of prefix averages)
};

/// Which average the mean-based kinds use. `fold_size` is the weighted
/// average sum w_k P_k; it equals the plain average when folds are equal.
enum class Averaging { uniform, fold_size };

/// A merging rule and the threshold the statistic must exceed.
struct CombinerSpec {
  CombinerKind kind = CombinerKind::mod;
  double threshold = 0.1;
  std::optional<RandomDraws> draws;  // required by u_mod and eu_mod
  Averaging averaging = Averaging::uniform;
};

struct MembershipVerdict {
  double statistic;
  bool included;  // statistic > threshold
};

/// (1/K) sum_k P_k.
double stat_mod(std::span<const double> p);
/// min over l of (1/l) sum_{k<=l} P_k.
double stat_emod(std::span<const double> p);
/// stat_mod(p) / (2 - u). Throws unless 0 < u < 1.
double stat_umod(std::span<const double> p, double u);
/// min(P_1 / (2 - u), stat_emod(p)). Throws unless 0 < u < 1.
double stat_eumod(std::span<const double> p, double u);
/// sum_k w_k P_k; falls back to stat_mod when all weights are equal.
double stat_weighted(std::span<const double> p, std::span<const double> weights);

/// Statistic for `spec` on `p`. Throws InvalidConfiguration when a
/// randomized kind has no draws.
double statistic(const CombinerSpec& spec, const PValueVector& p);
MembershipVerdict evaluate(const CombinerSpec& spec, const PValueVector& p);

/// Inflated threshold alpha + (1 - alpha)(K - 1)/(K + n): the mean-p-value
/// rule at this level reproduces the cross-conformal set at level alpha.
double alpha_prime(double alpha, std::size_t K, std::size_t n);

/// Lower bounds on the marginal coverage of the cross-conformal set.
struct CoverageBounds {
  double small_k;   // 1 - 2a - 2(1-a)(1 - 1/K)/(n/K + 1)
  double large_k;   // 1 - 2a - 2(1-a)(1 - K/n)/(K + 1)
  double combined;  // max of the two
};

CoverageBounds coverage_bounds(double alpha, std::size_t K, std::size_t n);

/// Whether discrete p-values can reject at all: 1 < alpha (m + 1).
bool informative(double alpha, std::size_t fold_size);

std::string to_string(CombinerKind kind);

}  // namespace crossconf
