#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "tkbc/error.hpp"

namespace tkbc {

// Discrete time instant at dataset granularity (offset from the earliest observed label).
using Instant = std::int64_t;

inline constexpr Instant kNegUnbounded = std::numeric_limits<Instant>::min();
inline constexpr Instant kPosUnbounded = std::numeric_limits<Instant>::max();

// Inclusive interval [begin, end] over instants. Either endpoint may be unbounded.
struct TimeInterval {
  Instant begin = 0;
  Instant end = 0;

  static TimeInterval at(Instant t) { return {t, t}; }

  static TimeInterval make(Instant b, Instant e) {
    if (b != kNegUnbounded && e != kPosUnbounded && b > e) {
      throw RangeError("interval begin " + std::to_string(b) + " after end " + std::to_string(e));
    }
    return {b, e};
  }

  bool begin_bounded() const { return begin != kNegUnbounded; }
  bool end_bounded() const { return end != kPosUnbounded; }
  bool bounded() const { return begin_bounded() && end_bounded(); }
  bool contains(Instant t) const { return begin <= t && t <= end; }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const TimeInterval& t) {
  os << '[';
  if (t.begin_bounded()) os << t.begin; else os << "-inf";
  os << ',';
  if (t.end_bounded()) os << t.end; else os << "+inf";
  return os << ']';
}

inline void require_bounded(const TimeInterval& t, const char* what) {
  if (!t.bounded()) {
    throw RangeError(std::string(what) + ": interval has an unbounded endpoint");
  }
}

// Number of instants in a bounded interval: b - a + 1.
inline Instant interval_volume(const TimeInterval& t) {
  require_bounded(t, "interval_volume");
  return t.end - t.begin + 1;
}

// Smallest contiguous interval containing both.
inline TimeInterval interval_hull(const TimeInterval& a, const TimeInterval& b) {
  require_bounded(a, "interval_hull");
  require_bounded(b, "interval_hull");
  return {std::min(a.begin, b.begin), std::max(a.end, b.end)};
}

inline std::optional<TimeInterval> interval_intersection(const TimeInterval& a, const TimeInterval& b) {
  require_bounded(a, "interval_intersection");
  require_bounded(b, "interval_intersection");
  const Instant lo = std::max(a.begin, b.begin);
  const Instant hi = std::min(a.end, b.end);
  if (lo > hi) return std::nullopt;
  return TimeInterval{lo, hi};
}

inline Instant intersection_volume(const TimeInterval& a, const TimeInterval& b) {
  const auto x = interval_intersection(a, b);
  return x ? interval_volume(*x) : 0;
}

inline Instant interval_union_volume(const TimeInterval& a, const TimeInterval& b) {
  return interval_volume(a) + interval_volume(b) - intersection_volume(a, b);
}

// Closed instant domain [first, last] of a dataset.
struct InstantDomain {
  Instant first = 0;
  Instant last = -1;

  Instant size() const { return last - first + 1; }
  bool empty() const { return last < first; }
};

// Replaces unbounded endpoints by the domain edges and intersects with the domain.
inline std::optional<TimeInterval> clip(const TimeInterval& t, const InstantDomain& d) {
  const Instant lo = std::max(t.begin, d.first);
  const Instant hi = std::min(t.end, d.last);
  if (lo > hi) return std::nullopt;
  return TimeInterval{lo, hi};
}

}  // namespace tkbc
