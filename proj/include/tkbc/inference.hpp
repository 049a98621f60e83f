#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "tkbc/error.hpp"
#include "tkbc/gadgets.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/metrics.hpp"
#include "tkbc/parallel.hpp"
#include "tkbc/scoring.hpp"

namespace tkbc {

// Model plus optional gadget state; kappa and lambda weight the pair and recurrence features.
template <class Real = float, class GReal = float>
struct BasicScorer {
  const BasicModel<Real>* model = nullptr;
  const GadgetIndex* index = nullptr;
  const BasicGadgetParams<GReal>* gadgets = nullptr;
  double kappa = 0.0;
  double lambda = 0.0;

  bool with_gadgets() const { return index && gadgets && (kappa != 0.0 || lambda != 0.0); }

  const BasicModel<Real>& base() const {
    if (!model) throw Error("scorer has no model");
    return *model;
  }

  double score(EntityId s, RelationId r, EntityId o, const TimeInterval& T) const {
    double v = score_tx_interval(base(), s, r, o, T);
    if (with_gadgets()) v += score_gadgets(*index, *gadgets, s, r, o, T, kappa, lambda);
    return v;
  }
};

using Scorer = BasicScorer<float, float>;

enum class QueryDirection { object_missing, subject_missing };

// (s, r, ?, T) when object_missing, (?, r, o, T) when subject_missing; entity is the known side.
struct LinkQuery {
  QueryDirection direction = QueryDirection::object_missing;
  EntityId entity = 0;
  RelationId relation = 0;
  TimeInterval interval;
};

// Object-missing form over the inverse-augmented relation ids.
struct ObjectQuery {
  EntityId anchor = 0;
  RelationId relation = 0;
  TimeInterval interval;
};

inline ObjectQuery normalize_query(const LinkQuery& q, std::size_t base_relations) {
  if (q.direction == QueryDirection::object_missing) return {q.entity, q.relation, q.interval};
  const auto b = static_cast<RelationId>(base_relations);
  return {q.entity, q.relation < b ? q.relation + b : q.relation - b, q.interval};
}

// Score of (anchor, relation, e, interval) for every entity e. The interval must be bounded.
template <class Real, class GReal>
std::vector<double> score_candidates(const BasicScorer<Real, GReal>& sc, const ObjectQuery& q) {
  auto out = score_all_objects(sc.base(), q.anchor, q.relation, q.interval);
  if (sc.with_gadgets()) {
    for (std::size_t e = 0; e < out.size(); ++e) {
      out[e] += score_gadgets(*sc.index, *sc.gadgets, q.anchor, q.relation, static_cast<EntityId>(e), q.interval,
                              sc.kappa, sc.lambda);
    }
  }
  return out;
}

struct RankedEntity {
  EntityId entity;
  double score;
};

// Decreasing score; equal scores by ascending entity id.
inline bool ranks_before(const RankedEntity& a, const RankedEntity& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.entity < b.entity;
}

inline std::vector<RankedEntity> order_entities(std::span<const double> scores) {
  std::vector<RankedEntity> out(scores.size());
  for (std::size_t e = 0; e < scores.size(); ++e) out[e] = {static_cast<EntityId>(e), scores[e]};
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

template <class Real, class GReal>
std::vector<RankedEntity> rank_entities(const BasicScorer<Real, GReal>& sc, const ObjectQuery& q) {
  return order_entities(score_candidates(sc, q));
}

// Entities ranked above gold, in ranking order, followed by gold itself.
inline std::vector<EntityId> ranking_prefix(std::span<const double> scores, EntityId gold) {
  if (gold < 0 || static_cast<std::size_t>(gold) >= scores.size()) throw RangeError("gold entity out of range");
  const RankedEntity g{gold, scores[static_cast<std::size_t>(gold)]};
  std::vector<RankedEntity> above;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    const RankedEntity c{static_cast<EntityId>(e), scores[e]};
    if (ranks_before(c, g)) above.push_back(c);
  }
  std::sort(above.begin(), above.end(), ranks_before);
  std::vector<EntityId> out;
  out.reserve(above.size() + 1);
  for (const auto& c : above) out.push_back(c.entity);
  out.push_back(gold);
  return out;
}

inline std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

// Score of (s, r, o, [t, t]) for every instant t.
template <class Real, class GReal>
std::vector<double> time_scores(const BasicScorer<Real, GReal>& sc, EntityId s, RelationId r, EntityId o) {
  auto out = score_all_times(sc.base(), s, r, o);
  if (sc.with_gadgets()) {
    for (std::size_t t = 0; t < out.size(); ++t) {
      out[t] += score_gadgets(*sc.index, *sc.gadgets, s, r, o, TimeInterval::at(static_cast<Instant>(t)), sc.kappa,
                              sc.lambda);
    }
  }
  return out;
}

template <class Real, class GReal>
std::vector<double> time_distribution(const BasicScorer<Real, GReal>& sc, EntityId s, RelationId r, EntityId o) {
  return softmax(time_scores(sc, s, r, o));
}

// Starts at the most probable instant and extends toward the more probable neighbour until
// the covered mass reaches theta or the domain is exhausted. Ties extend to the right.
inline TimeInterval greedy_coalesce(std::span<const double> dist, double theta) {
  if (dist.empty()) throw RangeError("greedy_coalesce: empty distribution");
  if (!(theta > 0.0 && theta <= 1.0)) throw RangeError("greedy_coalesce: theta must be in (0, 1]");
  const std::size_t n = dist.size();
  std::size_t lo = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
  std::size_t hi = lo;
  double mass = dist[lo];
  while (mass < theta && (lo > 0 || hi + 1 < n)) {
    const double left = lo > 0 ? dist[lo - 1] : -1.0;
    const double right = hi + 1 < n ? dist[hi + 1] : -1.0;
    if (right >= left) mass += dist[++hi];
    else mass += dist[--lo];
  }
  return {static_cast<Instant>(lo), static_cast<Instant>(hi)};
}

inline constexpr std::array<double, 10> kThresholdGrid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
inline constexpr double kDefaultThreshold = 0.4;

// Per-relation coalescing threshold over base relations; inverse ids share their base entry.
struct ThresholdTable {
  std::vector<double> theta;
  double fallback = kDefaultThreshold;

  ThresholdTable() = default;
  explicit ThresholdTable(std::size_t base_relations, double value = kDefaultThreshold)
      : theta(base_relations, value), fallback(value) {}

  double at(RelationId r) const {
    if (theta.empty()) return fallback;
    const auto n = static_cast<RelationId>(theta.size());
    const RelationId b = r >= n ? r - n : r;
    if (b < 0 || b >= n) return fallback;
    return theta[static_cast<std::size_t>(b)];
  }

  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;
};

template <class Real, class GReal>
TimeInterval predict_interval(const BasicScorer<Real, GReal>& sc, const ThresholdTable& table, EntityId s,
                              RelationId r, EntityId o) {
  return greedy_coalesce(time_distribution(sc, s, r, o), table.at(r));
}

// Facts usable for time prediction: base orientation with both endpoints bounded.
inline std::vector<Fact> time_queries(const TemporalKB& kb, Fold fold) {
  std::vector<Fact> out;
  for (const auto& f : kb.fold(fold)) {
    if (kb.vocab().is_inverse(f.relation) || !f.interval.bounded()) continue;
    out.push_back(f);
  }
  return out;
}

// Grid-searches theta per relation on the given fold. Relations without queries take the
// globally best value; with no queries at all every relation keeps the default.
template <class Real, class GReal>
ThresholdTable tune_thresholds(const BasicScorer<Real, GReal>& sc, const TemporalKB& kb,
                               IntervalMetric metric = IntervalMetric::aeiou, Fold fold = Fold::dev) {
  const std::size_t nb = kb.vocab().num_base_relations();
  ThresholdTable table(nb);
  const auto queries = time_queries(kb, fold);
  if (queries.empty()) return table;
  constexpr std::size_t G = kThresholdGrid.size();
  std::vector<std::array<double, G>> per_query(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    const Fact& f = queries[i];
    const auto dist = time_distribution(sc, f.subject, f.relation, f.object);
    for (std::size_t g = 0; g < G; ++g) {
      per_query[i][g] = metric_value(metric, f.interval, greedy_coalesce(dist, kThresholdGrid[g]));
    }
  });
  std::vector<std::array<double, G>> sum(nb);
  std::vector<std::size_t> count(nb, 0);
  std::array<double, G> global{};
  for (auto& s : sum) s.fill(0.0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto r = static_cast<std::size_t>(queries[i].relation);
    ++count[r];
    for (std::size_t g = 0; g < G; ++g) {
      sum[r][g] += per_query[i][g];
      global[g] += per_query[i][g];
    }
  }
  auto best = [](const std::array<double, G>& v) {
    return kThresholdGrid[static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin())];
  };
  table.fallback = best(global);
  for (std::size_t r = 0; r < nb; ++r) table.theta[r] = count[r] ? best(sum[r]) : table.fallback;
  return table;
}

}  // namespace tkbc
