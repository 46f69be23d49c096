#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace crossconf {

/// Interval on the response line. Endpoints may be infinite; infinite ends
/// are always open. Finite ends are closed unless the membership predicate
/// excludes the endpoint itself, which only smoothed p-values can cause.
struct Interval {
  double lo;
  double hi;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double y) const;
  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Finite union of sorted, pairwise disjoint, non-adjacent intervals.
class PredictionSet {
 public:
  PredictionSet() = default;
  /// Validates ordering and disjointness.
  explicit PredictionSet(std::vector<Interval> intervals, bool hulled = false);

  static PredictionSet empty() { return PredictionSet(); }
  static PredictionSet whole_line();
  static PredictionSet closed(double lo, double hi);

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool hulled() const { return hulled_; }
  std::size_t components() const { return intervals_.size(); }
  bool is_empty() const { return intervals_.empty(); }
  bool is_whole_line() const;

  bool contains(double y) const;
  /// Lebesgue measure; +inf if any interval is unbounded.
  double width() const;

  /// Single interval spanning the extreme endpoints.
  PredictionSet hull() const;

  /// Exact set inclusion, endpoint closure included.
  bool subset_of(const PredictionSet& other) const;

  bool operator==(const PredictionSet&) const = default;

 private:
  std::vector<Interval> intervals_;
  bool hulled_ = false;
};

/// Recovers {y : membership(y)} exactly for a predicate that is constant on
/// each open gap between consecutive `sorted_candidates`.
///
/// Evaluates the predicate at every candidate, at one interior point of each
/// nonempty gap, and once on each unbounded side. With no candidates, the
/// predicate is evaluated once and the result is the whole line or empty.
PredictionSet endpoint_scan(std::span<const double> sorted_candidates, const std::function<bool(double)>& membership);

/// Points at which endpoint_scan evaluates the predicate, in ascending order.
std::vector<double> scan_points(std::span<const double> sorted_candidates);

/// JSON text: list of [lo, hi] pairs with "-inf" / "inf" sentinels.
std::string to_json(const PredictionSet& set);

}  // namespace crossconf
