#include "crossconf/data.hpp"

#include <algorithm>
#include <numeric>

#include "crossconf/errors.hpp"

namespace crossconf {

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd responses)
    : features_(std::move(features)), responses_(std::move(responses)) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw InvalidData("dataset needs at least one row and one feature column");
  }
  if (features_.rows() != responses_.size()) {
    throw InvalidData("feature rows (" + std::to_string(features_.rows()) +
                      ") do not match response length (" + std::to_string(responses_.size()) + ")");
  }
  if (!features_.allFinite() || !responses_.allFinite()) {
    throw InvalidData("dataset contains non-finite entries");
  }
}

Eigen::MatrixXd Dataset::feature_rows(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), features_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return out;
}

Eigen::VectorXd Dataset::response_rows(std::span<const std::size_t> indices) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out(static_cast<Eigen::Index>(r)) = responses_(static_cast<Eigen::Index>(indices[r]));
  }
  return out;
}

FoldAssignment::FoldAssignment(std::size_t n, FoldMode mode,
                               std::vector<std::vector<std::size_t>> members,
                               std::vector<std::size_t> discarded)
    : mode_(mode),
      members_(std::move(members)),
      discarded_(std::move(discarded)),
      fold_of_(n, kDiscarded) {
  if (members_.empty()) {
    throw InvalidConfiguration("fold assignment needs at least one fold");
  }
  std::vector<bool> seen(n, false);
  auto claim = [&](std::size_t i) {
    if (i >= n) throw InvalidConfiguration("fold member index out of range");
    if (seen[i]) throw InvalidConfiguration("point assigned twice in fold assignment");
    seen[i] = true;
  };
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (members_[k].empty()) throw InvalidConfiguration("empty fold in fold assignment");
    std::sort(members_[k].begin(), members_[k].end());
    for (std::size_t i : members_[k]) {
      claim(i);
      fold_of_[i] = k;
    }
  }
  std::sort(discarded_.begin(), discarded_.end());
  for (std::size_t i : discarded_) claim(i);
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidConfiguration("fold assignment does not cover every point");
  }
  if (mode_ == FoldMode::varying_size && !discarded_.empty()) {
    throw InvalidConfiguration("varying-size folds never discard points");
  }
  if (mode_ == FoldMode::equal_size && !equal_sizes()) {
    throw InvalidConfiguration("equal-size fold assignment has unequal folds");
  }
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(members_.size());
  for (const auto& m : members_) sizes.push_back(m.size());
  return sizes;
}

bool FoldAssignment::equal_sizes() const {
  return std::all_of(members_.begin(), members_.end(),
                     [&](const auto& m) { return m.size() == members_.front().size(); });
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t k) const {
  std::vector<std::size_t> out;
  out.reserve(used_points() - members_.at(k).size());
  for (std::size_t i = 0; i < fold_of_.size(); ++i) {
    if (fold_of_[i] != kDiscarded && fold_of_[i] != k) out.push_back(i);
  }
  return out;
}

FoldAssignment assign_folds(std::size_t n, std::size_t K, FoldMode mode, const RandomSource& rng,
                            LargeFoldPlacement placement) {
  if (K == 0 || K > n) {
    throw InvalidConfiguration("fold count K=" + std::to_string(K) + " must satisfy 1 <= K <= n=" +
                               std::to_string(n));
  }
  Engine engine = rng.engine(Substream::folds);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), engine);

  const std::size_t base = n / K;
  const std::size_t remainder = n % K;

  std::vector<std::size_t> sizes(K, base);
  std::vector<std::size_t> discarded;
  std::size_t cursor = 0;
  if (mode == FoldMode::equal_size) {
    discarded.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(remainder));
    cursor = remainder;
  } else {
    for (std::size_t k = 0; k < remainder; ++k) sizes[k] = base + 1;
    if (placement == LargeFoldPlacement::random) {
      std::shuffle(sizes.begin(), sizes.end(), engine);
    }
  }

  std::vector<std::vector<std::size_t>> members(K);
  for (std::size_t k = 0; k < K; ++k) {
    members[k].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                      order.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[k]));
    cursor += sizes[k];
  }
  return FoldAssignment(n, mode, std::move(members), std::move(discarded));
}

FoldMode parse_fold_mode(const std::string& text) {
  if (text == "equal") return FoldMode::equal_size;
  if (text == "varying") return FoldMode::varying_size;
  throw InvalidConfiguration("unknown fold mode '" + text + "' (expected equal|varying)");
}

std::string to_string(FoldMode mode) {
  return mode == FoldMode::equal_size ? "equal" : "varying";
}

}  // namespace crossconf
