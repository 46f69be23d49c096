#include "crossconf/prediction_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lower_covers(const Interval& outer, const Interval& inner) {
  return outer.lo < inner.lo || (outer.lo == inner.lo && (outer.lo_closed || !inner.lo_closed));
}

bool upper_covers(const Interval& outer, const Interval& inner) {
  return outer.hi > inner.hi || (outer.hi == inner.hi && (outer.hi_closed || !inner.hi_closed));
}

nlohmann::json endpoint_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

}  // namespace

bool Interval::contains(double y) const {
  const bool above = lo_closed ? y >= lo : y > lo;
  const bool below = hi_closed ? y <= hi : y < hi;
  return above && below;
}

PredictionSet::PredictionSet(std::vector<Interval> intervals, bool hulled)
    : intervals_(std::move(intervals)), hulled_(hulled) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    Interval& iv = intervals_[i];
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) {
      throw InvalidConfiguration("interval endpoints out of order");
    }
    if (std::isinf(iv.lo)) iv.lo_closed = false;
    if (std::isinf(iv.hi)) iv.hi_closed = false;
    if (iv.lo == iv.hi && !(iv.lo_closed && iv.hi_closed)) {
      throw InvalidConfiguration("degenerate interval must be closed");
    }
    if (i > 0) {
      const Interval& prev = intervals_[i - 1];
      const bool separated = prev.hi < iv.lo || (prev.hi == iv.lo && !prev.hi_closed && !iv.lo_closed);
      if (!separated) throw InvalidConfiguration("intervals overlap or are unsorted");
    }
  }
  if (hulled_ && intervals_.size() > 1) throw InvalidConfiguration("hulled set must be a single interval");
}

PredictionSet PredictionSet::whole_line() {
  return PredictionSet({Interval{-kInf, kInf, false, false}});
}

PredictionSet PredictionSet::closed(double lo, double hi) {
  return PredictionSet({Interval{lo, hi, true, true}});
}

bool PredictionSet::is_whole_line() const {
  return intervals_.size() == 1 && intervals_[0].lo == -kInf && intervals_[0].hi == kInf;
}

bool PredictionSet::contains(double y) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), y,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  return it != intervals_.begin() && std::prev(it)->contains(y);
}

double PredictionSet::width() const {
  double total = 0.0;
  for (const Interval& iv : intervals_) total += iv.length();
  return total;
}

PredictionSet PredictionSet::hull() const {
  if (intervals_.empty()) {
    PredictionSet out;
    out.hulled_ = true;
    return out;
  }
  const Interval& first = intervals_.front();
  const Interval& last = intervals_.back();
  return PredictionSet({Interval{first.lo, last.hi, first.lo_closed, last.hi_closed}}, true);
}

bool PredictionSet::subset_of(const PredictionSet& other) const {
  const auto& outer = other.intervals_;
  for (const Interval& iv : intervals_) {
    // Last interval of `other` starting at or before iv.lo.
    auto it = std::upper_bound(outer.begin(), outer.end(), iv.lo,
                               [](double v, const Interval& o) { return v < o.lo; });
    bool covered = false;
    if (it != outer.begin()) {
      const Interval& cand = *std::prev(it);
      covered = lower_covers(cand, iv) && upper_covers(cand, iv);
    }
    if (!covered) return false;
  }
  return true;
}

std::vector<double> scan_points(std::span<const double> sorted_candidates) {
  std::vector<double> points;
  if (sorted_candidates.empty()) {
    points.push_back(0.0);
    return points;
  }
  const double first = sorted_candidates.front();
  const double last = sorted_candidates.back();
  points.push_back(first - std::max(1.0, std::abs(first)));
  for (std::size_t j = 0; j < sorted_candidates.size(); ++j) {
    points.push_back(sorted_candidates[j]);
    if (j + 1 < sorted_candidates.size()) {
      const double a = sorted_candidates[j];
      const double b = sorted_candidates[j + 1];
      const double mid = 0.5 * a + 0.5 * b;
      if (mid > a && mid < b) points.push_back(mid);
    }
  }
  points.push_back(last + std::max(1.0, std::abs(last)));
  return points;
}

PredictionSet endpoint_scan(std::span<const double> sorted_candidates, const std::function<bool(double)>& membership) {
  if (!std::is_sorted(sorted_candidates.begin(), sorted_candidates.end())) {
    throw InvalidConfiguration("endpoint_scan needs sorted candidates");
  }
  if (sorted_candidates.empty()) {
    return membership(0.0) ? PredictionSet::whole_line() : PredictionSet::empty();
  }

  std::vector<Interval> out;
  bool active = false;
  Interval run{0.0, 0.0, true, true};
  auto include = [&](double lo, bool lo_closed, double hi, bool hi_closed) {
    if (!active) {
      run.lo = lo;
      run.lo_closed = lo_closed;
      active = true;
    }
    run.hi = hi;
    run.hi_closed = hi_closed;
  };
  auto exclude = [&] {
    if (active) out.push_back(run);
    active = false;
  };

  const std::size_t count = sorted_candidates.size();
  const double first = sorted_candidates.front();
  const double last = sorted_candidates.back();

  if (membership(first - std::max(1.0, std::abs(first)))) {
    include(-kInf, false, first, false);
  }
  for (std::size_t j = 0; j < count; ++j) {
    const double e = sorted_candidates[j];
    if (membership(e)) {
      include(e, true, e, true);
    } else {
      exclude();
    }
    if (j + 1 < count) {
      const double next = sorted_candidates[j + 1];
      const double mid = 0.5 * e + 0.5 * next;
      if (mid > e && mid < next) {
        if (membership(mid)) {
          include(e, false, next, false);
        } else {
          exclude();
        }
      }
    }
  }
  if (membership(last + std::max(1.0, std::abs(last)))) {
    include(last, false, kInf, false);
  } else {
    exclude();
  }
  exclude();
  return PredictionSet(std::move(out));
}

std::string to_json(const PredictionSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Interval& iv : set.intervals()) {
    arr.push_back(nlohmann::json::array({endpoint_json(iv.lo), endpoint_json(iv.hi)}));
  }
  return arr.dump();
}

}  // namespace crossconf
