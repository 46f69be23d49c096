#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crossconf/random.hpp"

namespace crossconf {

/// Training sample: n rows of p features with one response each.
/// All entries finite, n >= 1 and p >= 1.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd responses);

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(features_.cols()); }

  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& responses() const { return responses_; }

  /// Rows listed in `indices`, in that order. May be empty.
  Eigen::MatrixXd feature_rows(std::span<const std::size_t> indices) const;
  Eigen::VectorXd response_rows(std::span<const std::size_t> indices) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd responses_;
};

enum class FoldMode { equal_size, varying_size };

/// Where the larger folds go when sizes differ. `random` keeps fold sizes
/// exchangeable across fold indices; `first` pins them to the lowest indices
/// and exists only to demonstrate what breaks without the shuffle.
enum class LargeFoldPlacement { random, first };

/// Partition of [n] into K folds plus (equal-size mode only) fewer than K
/// discarded points.
class FoldAssignment {
 public:
  static constexpr std::size_t kDiscarded = std::numeric_limits<std::size_t>::max();

  /// Validates that `members` and `discarded` partition [n].
  FoldAssignment(std::size_t n, FoldMode mode, std::vector<std::vector<std::size_t>> members,
                 std::vector<std::size_t> discarded = {});

  FoldMode mode() const { return mode_; }
  std::size_t folds() const { return members_.size(); }
  std::size_t total_points() const { return fold_of_.size(); }
  std::size_t used_points() const { return fold_of_.size() - discarded_.size(); }

  /// Fold index of point i, or kDiscarded.
  std::size_t fold_of(std::size_t i) const { return fold_of_.at(i); }
  const std::vector<std::size_t>& members(std::size_t k) const { return members_.at(k); }
  const std::vector<std::vector<std::size_t>>& all_members() const { return members_; }
  const std::vector<std::size_t>& discarded() const { return discarded_; }

  std::vector<std::size_t> fold_sizes() const;
  bool equal_sizes() const;

  /// Used points outside fold k, ascending.
  std::vector<std::size_t> complement(std::size_t k) const;

 private:
  FoldMode mode_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> discarded_;
  std::vector<std::size_t> fold_of_;
};

/// Uniformly random partition of [n] into K folds.
///
/// Equal-size mode keeps m = floor(n/K) points per fold and discards a
/// uniformly random subset of n mod K points. Varying-size mode keeps every
/// point; the n mod K folds of size m+1 are placed at uniformly random fold
/// indices unless `placement` says otherwise.
FoldAssignment assign_folds(std::size_t n, std::size_t K, FoldMode mode, const RandomSource& rng,
                            LargeFoldPlacement placement = LargeFoldPlacement::random);

FoldMode parse_fold_mode(const std::string& text);
std::string to_string(FoldMode mode);

}  // namespace crossconf
