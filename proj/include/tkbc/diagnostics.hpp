#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "tkbc/gadgets.hpp"
#include "tkbc/inference.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/model.hpp"

namespace tkbc {

struct ViolationReport {
  std::size_t queries = 0;
  std::size_t violations = 0;
  double rate() const { return queries ? static_cast<double>(violations) / static_cast<double>(queries) : 0.0; }
};

// True when entity e, asserted as subject of (e, r, *, begin t), breaks a constraint given its
// train facts: a later-relation fact for e must not begin at or before an earlier-relation fact.
inline bool violates_ordering(const TemporalKB& kb, const std::vector<OrderingConstraint>& constraints, EntityId e,
                              RelationId r, Instant t) {
  for (std::size_t idx : kb.train_facts_of(e)) {
    const Fact& f = kb.train()[idx];
    if (kb.vocab().is_inverse(f.relation) || !f.interval.begin_bounded()) continue;
    for (const auto& c : constraints) {
      if (r == c.later && f.relation == c.earlier && f.interval.begin >= t) return true;
      if (r == c.earlier && f.relation == c.later && f.interval.begin <= t) return true;
    }
  }
  return false;
}

// For every base fact (s, r, o, T) of the fold, asks (?, r, o, T) and checks the top-ranked
// subject against the constraints at begin(T). The rate divides by the number of facts.
template <class Real, class GReal>
ViolationReport ordering_violation_rate(const BasicScorer<Real, GReal>& sc, const TemporalKB& kb,
                                        const std::vector<OrderingConstraint>& constraints, Fold fold = Fold::test) {
  const std::size_t nb = kb.vocab().num_base_relations();
  std::vector<Fact> facts;
  for (const auto& f : kb.fold(fold)) {
    if (!kb.vocab().is_inverse(f.relation)) facts.push_back(f);
  }
  std::vector<std::uint8_t> hit(facts.size(), 0);
  parallel_for(facts.size(), [&](std::size_t i) {
    const Fact& f = facts[i];
    const auto T = clip(f.interval, kb.domain());
    if (!T || !f.interval.begin_bounded()) return;
    const auto q = normalize_query({QueryDirection::subject_missing, f.object, f.relation, *T}, nb);
    const auto scores = score_candidates(sc, q);
    const EntityId top = order_entities(scores).front().entity;
    hit[i] = violates_ordering(kb, constraints, top, f.relation, f.interval.begin) ? 1 : 0;
  });
  ViolationReport rep;
  rep.queries = facts.size();
  for (auto h : hit) rep.violations += h;
  return rep;
}

struct CurvePoint {
  Instant gap = 0;
  double mean_l2 = 0.0;
  std::size_t support = 0;
};

// Mean Euclidean distance between instant embeddings t and t + gap, over real and imaginary
// components, for gap in [1, max_gap]. Gaps with fewer than min_support pairs are dropped.
template <class Real>
std::vector<CurvePoint> embedding_distance_curve(const BasicModel<Real>& m, std::optional<Instant> max_gap = {},
                                                 std::size_t min_support = 30) {
  const auto nt = static_cast<Instant>(m.shape().num_instants);
  const Instant last = max_gap ? std::min(*max_gap, nt - 1) : nt - 1;
  std::vector<CurvePoint> out;
  for (Instant g = 1; g <= last; ++g) {
    const auto support = static_cast<std::size_t>(nt - g);
    if (support < min_support) continue;
    double sum = 0.0;
    for (Instant t = 0; t + g < nt; ++t) {
      const auto a = m.time(static_cast<std::size_t>(t)), b = m.time(static_cast<std::size_t>(t + g));
      double sq = 0.0;
      for (std::size_t d = 0; d < m.dim(); ++d) {
        const double dr = static_cast<double>(a.re[d]) - b.re[d];
        const double di = static_cast<double>(a.im[d]) - b.im[d];
        sq += dr * dr + di * di;
      }
      sum += std::sqrt(sq);
    }
    out.push_back({g, sum / static_cast<double>(support), support});
  }
  return out;
}

}  // namespace tkbc
