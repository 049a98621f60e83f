#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tkbc/error.hpp"
#include "tkbc/inference.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/metrics.hpp"
#include "tkbc/parallel.hpp"

namespace tkbc {

// Which (anchor, relation, entity) combinations are asserted in any fold, and over which
// intervals. Relations use inverse-augmented ids (r + |R_base| for the inverse of r) whether or
// not the knowledge base itself carries inverse facts.
class FilterIndex {
 public:
  FilterIndex() = default;

  explicit FilterIndex(const TemporalKB& kb) {
    const auto b = static_cast<RelationId>(kb.vocab().num_base_relations());
    for (Fold fold : {Fold::train, Fold::dev, Fold::test}) {
      for (const auto& f : kb.fold(fold)) {
        if (kb.vocab().is_inverse(f.relation)) continue;
        map_[key(f.subject, f.relation)][f.object].push_back(f.interval);
        map_[key(f.object, f.relation + b)][f.subject].push_back(f.interval);
      }
    }
  }

  // (anchor, r, e, *) in any fold.
  bool seen(EntityId anchor, RelationId r, EntityId e) const { return find(anchor, r, e) != nullptr; }

  // (anchor, r, e, T') in any fold with t in T'.
  bool asserted_at(EntityId anchor, RelationId r, EntityId e, Instant t) const {
    const auto* iv = find(anchor, r, e);
    if (!iv) return false;
    return std::any_of(iv->begin(), iv->end(), [t](const TimeInterval& x) { return x.contains(t); });
  }

  // (anchor, r, e, T) in any fold with exactly this interval.
  bool asserted_exact(EntityId anchor, RelationId r, EntityId e, const TimeInterval& T) const {
    const auto* iv = find(anchor, r, e);
    if (!iv) return false;
    return std::find(iv->begin(), iv->end(), T) != iv->end();
  }

 private:
  static std::uint64_t key(EntityId a, RelationId r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(r);
  }

  const std::vector<TimeInterval>* find(EntityId anchor, RelationId r, EntityId e) const {
    auto it = map_.find(key(anchor, r));
    if (it == map_.end()) return nullptr;
    auto jt = it->second.find(e);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  std::unordered_map<std::uint64_t, std::unordered_map<EntityId, std::vector<TimeInterval>>> map_;
};

namespace detail {

inline std::size_t gold_position(std::span<const EntityId> ranking, EntityId gold) {
  auto it = std::find(ranking.begin(), ranking.end(), gold);
  if (it == ranking.end()) throw RangeError("gold entity not present in ranking");
  return static_cast<std::size_t>(it - ranking.begin());
}

}  // namespace detail

// The ranking may be a full ordering or any prefix that ends at (or contains) gold.

inline double rank_unfiltered(std::span<const EntityId> ranking, EntityId gold) {
  return static_cast<double>(detail::gold_position(ranking, gold) + 1);
}

inline double rank_time_insensitive(std::span<const EntityId> ranking, EntityId gold, const FilterIndex& filter,
                                    const ObjectQuery& q) {
  const std::size_t pos = detail::gold_position(ranking, gold);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < pos; ++i) {
    if (!filter.seen(q.anchor, q.relation, ranking[i])) ++kept;
  }
  return static_cast<double>(kept + 1);
}

// Mean over instants of the query interval of the per-instant filtered rank.
inline double rank_time_aware(std::span<const EntityId> ranking, EntityId gold, const FilterIndex& filter,
                              const ObjectQuery& q) {
  require_bounded(q.interval, "rank_time_aware");
  const std::size_t pos = detail::gold_position(ranking, gold);
  std::vector<EntityId> candidates;
  for (std::size_t i = 0; i < pos; ++i) {
    if (filter.seen(q.anchor, q.relation, ranking[i])) candidates.push_back(ranking[i]);
  }
  const std::size_t always_kept = pos - candidates.size();
  double total = 0.0;
  for (Instant t = q.interval.begin; t <= q.interval.end; ++t) {
    std::size_t kept = always_kept;
    for (EntityId e : candidates) {
      if (!filter.asserted_at(q.anchor, q.relation, e, t)) ++kept;
    }
    total += static_cast<double>(kept + 1);
  }
  return total / static_cast<double>(interval_volume(q.interval));
}

inline double rank_exact_match(std::span<const EntityId> ranking, EntityId gold, const FilterIndex& filter,
                               const ObjectQuery& q) {
  const std::size_t pos = detail::gold_position(ranking, gold);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < pos; ++i) {
    if (!filter.asserted_exact(q.anchor, q.relation, ranking[i], q.interval)) ++kept;
  }
  return static_cast<double>(kept + 1);
}

enum class FilterMethod { unfiltered, time_insensitive, time_aware, exact };

inline const char* to_string(FilterMethod m) {
  switch (m) {
    case FilterMethod::unfiltered: return "unfiltered";
    case FilterMethod::time_insensitive: return "time-insensitive";
    case FilterMethod::time_aware: return "time-aware";
    case FilterMethod::exact: return "exact";
  }
  return "";
}

inline FilterMethod filter_method_from_string(std::string_view s) {
  for (auto m : {FilterMethod::unfiltered, FilterMethod::time_insensitive, FilterMethod::time_aware,
                 FilterMethod::exact}) {
    if (s == to_string(m)) return m;
  }
  throw UsageError("unknown filter '" + std::string(s) + "' (expected unfiltered|time-insensitive|time-aware|exact)");
}

struct LinkMetrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;
};

inline LinkMetrics aggregate_link_metrics(std::span<const double> ranks) {
  if (ranks.empty()) throw Error("aggregate_link_metrics: no ranks");
  LinkMetrics m;
  m.count = ranks.size();
  for (double r : ranks) {
    if (!(r >= 1.0)) throw RangeError("rank below 1");
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0 ? 1.0 : 0.0;
    m.hits10 += r <= 10.0 ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits10 /= n;
  return m;
}

struct RankReport {
  ObjectQuery query;  // interval clipped to the instant domain
  TimeInterval asserted;  // interval as stored in the fold
  EntityId gold = 0;
  double unfiltered = 0.0;
  double time_insensitive = 0.0;
  double time_aware = 0.0;
  double exact = 0.0;

  double rank(FilterMethod m) const {
    switch (m) {
      case FilterMethod::unfiltered: return unfiltered;
      case FilterMethod::time_insensitive: return time_insensitive;
      case FilterMethod::time_aware: return time_aware;
      case FilterMethod::exact: return exact;
    }
    return 0.0;
  }
};

struct LinkEvalOptions {
  bool time_aware = true;
  bool exact = true;
};

// Both link queries of every base fact in the fold.
inline std::vector<std::pair<ObjectQuery, EntityId>> link_queries(const TemporalKB& kb, Fold fold,
                                                                  std::vector<TimeInterval>* asserted = nullptr) {
  const std::size_t nb = kb.vocab().num_base_relations();
  std::vector<std::pair<ObjectQuery, EntityId>> out;
  for (const auto& f : kb.fold(fold)) {
    if (kb.vocab().is_inverse(f.relation)) continue;
    const auto T = clip(f.interval, kb.domain());
    if (!T) continue;
    out.push_back({{f.subject, f.relation, *T}, f.object});
    out.push_back({normalize_query({QueryDirection::subject_missing, f.object, f.relation, *T}, nb), f.subject});
    if (asserted) {
      asserted->push_back(f.interval);
      asserted->push_back(f.interval);
    }
  }
  return out;
}

template <class Real, class GReal>
std::vector<RankReport> evaluate_link(const BasicScorer<Real, GReal>& sc, const TemporalKB& kb, Fold fold,
                                      const FilterIndex& filter, LinkEvalOptions opts = {}) {
  if (sc.base().shape().num_relations < 2 * kb.vocab().num_base_relations()) {
    throw Error("link evaluation needs a model with inverse relations");
  }
  std::vector<TimeInterval> asserted;
  const auto queries = link_queries(kb, fold, &asserted);
  std::vector<RankReport> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    const auto& [q, gold] = queries[i];
    const auto scores = score_candidates(sc, q);
    const auto prefix = ranking_prefix(scores, gold);
    RankReport& r = out[i];
    r.query = q;
    r.asserted = asserted[i];
    r.gold = gold;
    r.unfiltered = rank_unfiltered(prefix, gold);
    r.time_insensitive = rank_time_insensitive(prefix, gold, filter, q);
    if (opts.time_aware) r.time_aware = rank_time_aware(prefix, gold, filter, q);
    if (opts.exact) r.exact = rank_exact_match(prefix, gold, filter, {q.anchor, q.relation, asserted[i]});
  });
  return out;
}

inline LinkMetrics summarize_link(std::span<const RankReport> reports, FilterMethod m) {
  std::vector<double> ranks;
  ranks.reserve(reports.size());
  for (const auto& r : reports) ranks.push_back(r.rank(m));
  return aggregate_link_metrics(ranks);
}

// MRR under time-insensitive filtering with base scores; used for model selection.
template <class Real>
double link_mrr_time_insensitive(const BasicModel<Real>& model, const TemporalKB& kb, Fold fold,
                                 const FilterIndex& filter) {
  BasicScorer<Real, float> sc{&model};
  const auto reports = evaluate_link(sc, kb, fold, filter, {false, false});
  return summarize_link(reports, FilterMethod::time_insensitive).mrr;
}

struct IntervalReport {
  Fact fact;
  TimeInterval predicted;
  double iou = 0.0, giou = 0.0, giou_prime = 0.0, aeiou = 0.0, tac = 0.0;

  double value(IntervalMetric m) const {
    switch (m) {
      case IntervalMetric::iou: return iou;
      case IntervalMetric::giou: return giou;
      case IntervalMetric::giou_prime: return giou_prime;
      case IntervalMetric::aeiou: return aeiou;
      case IntervalMetric::tac: return tac;
    }
    return 0.0;
  }
};

inline IntervalReport make_interval_report(const Fact& f, const TimeInterval& pred) {
  return {f,
          pred,
          metric_iou(f.interval, pred),
          metric_giou(f.interval, pred),
          metric_giou_prime(f.interval, pred),
          metric_aeiou(f.interval, pred),
          metric_tac(f.interval, pred)};
}

// Time prediction for every base fact of the fold whose gold interval is bounded.
template <class Real, class GReal>
std::vector<IntervalReport> evaluate_time(const BasicScorer<Real, GReal>& sc, const TemporalKB& kb, Fold fold,
                                          const ThresholdTable& table) {
  const auto queries = time_queries(kb, fold);
  std::vector<IntervalReport> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    const Fact& f = queries[i];
    out[i] = make_interval_report(f, predict_interval(sc, table, f.subject, f.relation, f.object));
  });
  return out;
}

struct IntervalSummary {
  std::size_t count = 0;
  double iou = 0.0, giou = 0.0, giou_prime = 0.0, aeiou = 0.0, tac = 0.0;

  double value(IntervalMetric m) const {
    switch (m) {
      case IntervalMetric::iou: return iou;
      case IntervalMetric::giou: return giou;
      case IntervalMetric::giou_prime: return giou_prime;
      case IntervalMetric::aeiou: return aeiou;
      case IntervalMetric::tac: return tac;
    }
    return 0.0;
  }
};

inline IntervalSummary summarize_time(std::span<const IntervalReport> reports) {
  if (reports.empty()) throw Error("summarize_time: no interval reports");
  IntervalSummary s;
  s.count = reports.size();
  for (const auto& r : reports) {
    s.iou += r.iou;
    s.giou += r.giou;
    s.giou_prime += r.giou_prime;
    s.aeiou += r.aeiou;
    s.tac += r.tac;
  }
  const auto n = static_cast<double>(s.count);
  s.iou /= n;
  s.giou /= n;
  s.giou_prime /= n;
  s.aeiou /= n;
  s.tac /= n;
  return s;
}

inline nlohmann::json to_json(const LinkMetrics& m) {
  return {{"mrr", m.mrr}, {"hits@1", m.hits1}, {"hits@10", m.hits10}, {"queries", m.count}};
}

inline nlohmann::json interval_json(const TimeInterval& t, const Vocabulary& v) {
  return nlohmann::json::array({v.instant_label(t.begin), v.instant_label(t.end)});
}

inline nlohmann::json to_json(const RankReport& r, const Vocabulary& v) {
  return {{"anchor", v.entity_name(r.query.anchor)},
          {"relation", v.relation_name(r.query.relation)},
          {"gold", v.entity_name(r.gold)},
          {"interval", interval_json(r.query.interval, v)},
          {"unfiltered", r.unfiltered},
          {"time_insensitive", r.time_insensitive},
          {"time_aware", r.time_aware},
          {"exact", r.exact}};
}

inline nlohmann::json to_json(const IntervalReport& r, const Vocabulary& v) {
  return {{"subject", v.entity_name(r.fact.subject)},
          {"relation", v.relation_name(r.fact.relation)},
          {"object", v.entity_name(r.fact.object)},
          {"gold", interval_json(r.fact.interval, v)},
          {"predicted", interval_json(r.predicted, v)},
          {"iou", r.iou},
          {"giou", r.giou},
          {"giou_prime", r.giou_prime},
          {"aeiou", r.aeiou},
          {"tac", r.tac}};
}

}  // namespace tkbc
