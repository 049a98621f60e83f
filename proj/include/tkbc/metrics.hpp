#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tkbc/error.hpp"
#include "tkbc/interval.hpp"

namespace tkbc {

// Interval metrics over bounded, inclusive discrete intervals. Volumes count instants.

inline double metric_iou(const TimeInterval& gold, const TimeInterval& pred) {
  const auto inter = static_cast<double>(intersection_volume(gold, pred));
  return inter / static_cast<double>(interval_union_volume(gold, pred));
}

inline double metric_giou(const TimeInterval& gold, const TimeInterval& pred) {
  const auto hull = static_cast<double>(interval_volume(interval_hull(gold, pred)));
  const auto uni = static_cast<double>(interval_union_volume(gold, pred));
  return metric_iou(gold, pred) - (hull - uni) / hull;
}

inline double metric_giou_prime(const TimeInterval& gold, const TimeInterval& pred) {
  return (metric_giou(gold, pred) + 1.0) / 2.0;
}

inline double metric_aeiou(const TimeInterval& gold, const TimeInterval& pred) {
  const auto inter = intersection_volume(gold, pred);
  const auto hull = interval_volume(interval_hull(gold, pred));
  return static_cast<double>(std::max<Instant>(1, inter)) / static_cast<double>(hull);
}

inline double metric_tac(const TimeInterval& gold, const TimeInterval& pred) {
  require_bounded(gold, "metric_tac");
  require_bounded(pred, "metric_tac");
  const auto db = static_cast<double>(std::llabs(gold.begin - pred.begin));
  const auto de = static_cast<double>(std::llabs(gold.end - pred.end));
  return 0.5 * (1.0 / (1.0 + db) + 1.0 / (1.0 + de));
}

enum class IntervalMetric { iou, giou, giou_prime, aeiou, tac };

inline constexpr IntervalMetric kAllIntervalMetrics[] = {IntervalMetric::iou, IntervalMetric::giou,
                                                         IntervalMetric::giou_prime, IntervalMetric::aeiou,
                                                         IntervalMetric::tac};

inline const char* to_string(IntervalMetric m) {
  switch (m) {
    case IntervalMetric::iou: return "iou";
    case IntervalMetric::giou: return "giou";
    case IntervalMetric::giou_prime: return "giou_prime";
    case IntervalMetric::aeiou: return "aeiou";
    case IntervalMetric::tac: return "tac";
  }
  return "";
}

inline IntervalMetric interval_metric_from_string(std::string_view s) {
  for (auto m : kAllIntervalMetrics) {
    if (s == to_string(m)) return m;
  }
  throw UsageError("unknown interval metric '" + std::string(s) + "' (expected iou|giou|giou_prime|aeiou|tac)");
}

inline double metric_value(IntervalMetric m, const TimeInterval& gold, const TimeInterval& pred) {
  switch (m) {
    case IntervalMetric::iou: return metric_iou(gold, pred);
    case IntervalMetric::giou: return metric_giou(gold, pred);
    case IntervalMetric::giou_prime: return metric_giou_prime(gold, pred);
    case IntervalMetric::aeiou: return metric_aeiou(gold, pred);
    case IntervalMetric::tac: return metric_tac(gold, pred);
  }
  return 0.0;
}

struct PropertyPViolation {
  TimeInterval gold, first, second;
};

struct PropertyPReport {
  std::uint64_t comparisons = 0;
  std::uint64_t violations = 0;
  std::vector<PropertyPViolation> examples;  // the first few violations found
};

// Exhaustive check over all intervals inside [1, n]: for every gold interval and every pair of
// predictions with equal intersection volume against it, the prediction with the smaller hull
// must score strictly higher, and equal hulls must score equally.
inline PropertyPReport verify_property_p(const std::function<double(const TimeInterval&, const TimeInterval&)>& metric,
                                         Instant n, std::size_t max_examples = 16) {
  if (n < 1 || n > 25) throw RangeError("verify_property_p: domain size must be in [1, 25]");
  std::vector<TimeInterval> all;
  for (Instant a = 1; a <= n; ++a) {
    for (Instant b = a; b <= n; ++b) all.push_back({a, b});
  }
  PropertyPReport rep;
  struct Scored {
    Instant inter, hull;
    double score;
    std::size_t idx;
  };
  std::vector<Scored> row(all.size());
  for (const auto& gold : all) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      row[i] = {intersection_volume(gold, all[i]), interval_volume(interval_hull(gold, all[i])),
                metric(gold, all[i]), i};
    }
    std::sort(row.begin(), row.end(), [](const Scored& x, const Scored& y) { return x.inter < y.inter; });
    for (std::size_t lo = 0; lo < row.size();) {
      std::size_t hi = lo;
      while (hi < row.size() && row[hi].inter == row[lo].inter) ++hi;
      for (std::size_t i = lo; i < hi; ++i) {
        for (std::size_t j = i + 1; j < hi; ++j) {
          ++rep.comparisons;
          const auto& x = row[i];
          const auto& y = row[j];
          const bool ok = x.hull < y.hull   ? x.score > y.score
                          : x.hull > y.hull ? x.score < y.score
                                            : x.score == y.score;
          if (ok) continue;
          ++rep.violations;
          if (rep.examples.size() < max_examples) rep.examples.push_back({gold, all[x.idx], all[y.idx]});
        }
      }
      lo = hi;
    }
  }
  return rep;
}

inline PropertyPReport verify_property_p(IntervalMetric m, Instant n, std::size_t max_examples = 16) {
  return verify_property_p([m](const TimeInterval& g, const TimeInterval& p) { return metric_value(m, g, p); }, n,
                           max_examples);
}

}  // namespace tkbc
