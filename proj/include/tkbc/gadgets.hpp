#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tkbc/error.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/scoring.hpp"

namespace tkbc {

inline double gaussian_density(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw RangeError("gaussian_density: sigma must be positive");
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

enum class Side : std::size_t { subject = 0, object = 1 };

// Train-fold evidence used by the recurrence and relation-pair features. Built from base
// (non-inverse) facts; every interval is reduced to its begin instant.
class GadgetIndex {
 public:
  struct Neighbor {
    RelationId relation;
    Instant begin;
  };

  struct Occurrences {
    std::vector<Instant> begins;  // sorted, bounded begins only
    int unbounded = 0;            // facts whose begin is unknown
    std::size_t size() const { return begins.size() + static_cast<std::size_t>(unbounded); }
  };

  GadgetIndex() = default;

  explicit GadgetIndex(const TemporalKB& kb)
      : base_relations_(kb.vocab().num_base_relations()), neighbors_{} {
    const std::size_t ne = kb.num_entities();
    neighbors_[0].resize(ne);
    neighbors_[1].resize(ne);
    for (const Fact& f : kb.train()) {
      if (kb.vocab().is_inverse(f.relation)) continue;
      auto& occ = triples_[triple_key(f.subject, f.relation, f.object)];
      if (!f.interval.begin_bounded()) {
        ++occ.unbounded;
        continue;
      }
      occ.begins.push_back(f.interval.begin);
      neighbors_[0][static_cast<std::size_t>(f.subject)].push_back({f.relation, f.interval.begin});
      neighbors_[1][static_cast<std::size_t>(f.object)].push_back({f.relation, f.interval.begin});
    }
    for (auto& [key, occ] : triples_) std::sort(occ.begins.begin(), occ.begins.end());
  }

  std::size_t num_base_relations() const { return base_relations_; }
  std::size_t num_entities() const { return neighbors_[0].size(); }

  const Occurrences* occurrences(EntityId s, RelationId r, EntityId o) const {
    auto it = triples_.find(triple_key(s, r, o));
    return it == triples_.end() ? nullptr : &it->second;
  }

  // Facts in which e fills the given side.
  std::span<const Neighbor> neighbors(Side side, EntityId e) const {
    const auto& v = neighbors_[static_cast<std::size_t>(side)];
    if (e < 0 || static_cast<std::size_t>(e) >= v.size()) return {};
    return v[static_cast<std::size_t>(e)];
  }

  const std::unordered_map<std::uint64_t, Occurrences>& triples() const { return triples_; }

 private:
  std::size_t base_relations_ = 0;
  std::unordered_map<std::uint64_t, Occurrences> triples_;
  std::array<std::vector<std::vector<Neighbor>>, 2> neighbors_;
};

namespace detail {

inline std::vector<Instant> distinct(std::span<const Instant> sorted) {
  std::vector<Instant> out(sorted.begin(), sorted.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline EntityId key_subject(std::uint64_t k) { return static_cast<EntityId>(k >> 40); }
inline RelationId key_relation(std::uint64_t k) { return static_cast<RelationId>((k >> 24) & 0xFFFF); }

// Smallest |t - t'| over t' != t.
inline std::optional<Instant> closest_gap(std::span<const Instant> begins, Instant t) {
  std::optional<Instant> best;
  for (Instant b : begins) {
    if (b == t) continue;
    const Instant d = b > t ? b - t : t - b;
    if (!best || d < *best) best = d;
  }
  return best;
}

}  // namespace detail

// Relations with at least k_rec distinct (s, o) pairs whose triple has two or more distinct begins.
inline std::vector<bool> detect_recurrent_relations(const GadgetIndex& index, std::size_t k_rec) {
  std::vector<std::size_t> count(index.num_base_relations(), 0);
  for (const auto& [key, occ] : index.triples()) {
    if (detail::distinct(occ.begins).size() >= 2) ++count[static_cast<std::size_t>(detail::key_relation(key))];
  }
  std::vector<bool> out(count.size());
  for (std::size_t r = 0; r < count.size(); ++r) out[r] = count[r] >= k_rec && k_rec > 0;
  return out;
}

inline std::vector<bool> detect_recurrent_relations(const TemporalKB& kb, std::size_t k_rec) {
  return detect_recurrent_relations(GadgetIndex(kb), k_rec);
}

inline std::optional<Instant> closest_recurrence_gap(const GadgetIndex& index, EntityId s, RelationId r, EntityId o,
                                                     Instant t) {
  const auto* occ = index.occurrences(s, r, o);
  if (!occ) return std::nullopt;
  return detail::closest_gap(occ->begins, t);
}

// Count, mean and standard deviation of signed begin differences t_r - t_r' for every ordered
// relation pair, per side. Standard deviations are floored at sigma_floor.
struct GadgetStats {
  std::size_t num_relations = 0;
  double sigma_floor = 1.0;
  std::array<std::vector<std::int64_t>, 2> count;
  std::array<std::vector<float>, 2> mean;
  std::array<std::vector<float>, 2> stddev;

  std::size_t at(RelationId r, RelationId r2) const {
    return static_cast<std::size_t>(r) * num_relations + static_cast<std::size_t>(r2);
  }
};

inline GadgetStats fit_pair_statistics(const GadgetIndex& index, double sigma_floor = 1.0) {
  const std::size_t nr = index.num_base_relations();
  GadgetStats st;
  st.num_relations = nr;
  st.sigma_floor = sigma_floor;
  std::array<std::vector<double>, 2> sum, sumsq;
  for (std::size_t side = 0; side < 2; ++side) {
    st.count[side].assign(nr * nr, 0);
    st.mean[side].assign(nr * nr, 0.0f);
    st.stddev[side].assign(nr * nr, static_cast<float>(sigma_floor));
    sum[side].assign(nr * nr, 0.0);
    sumsq[side].assign(nr * nr, 0.0);
    for (std::size_t e = 0; e < index.num_entities(); ++e) {
      const auto nb = index.neighbors(static_cast<Side>(side), static_cast<EntityId>(e));
      for (const auto& a : nb) {
        for (const auto& b : nb) {
          if (a.relation == b.relation) continue;
          const std::size_t k = st.at(a.relation, b.relation);
          const double d = static_cast<double>(a.begin - b.begin);
          ++st.count[side][k];
          sum[side][k] += d;
          sumsq[side][k] += d * d;
        }
      }
    }
    for (std::size_t k = 0; k < nr * nr; ++k) {
      const auto n = st.count[side][k];
      if (n == 0) continue;
      const double mu = sum[side][k] / static_cast<double>(n);
      const double var = std::max(0.0, sumsq[side][k] / static_cast<double>(n) - mu * mu);
      st.mean[side][k] = static_cast<float>(mu);
      st.stddev[side][k] = static_cast<float>(std::max(sigma_floor, std::sqrt(var)));
    }
  }
  return st;
}

inline GadgetStats fit_pair_statistics(const TemporalKB& kb, double sigma_floor = 1.0) {
  return fit_pair_statistics(GadgetIndex(kb), sigma_floor);
}

// Recurrence and relation-pair parameters over base relations. Gaussian means and deviations
// are fitted constants; biases and weights live in one flat trainable vector laid out as
// [rec_b | rec_w | pair_b(subject) | pair_w(subject) | pair_b(object) | pair_w(object)].
template <class Real>
struct BasicGadgetParams {
  std::size_t num_relations = 0;
  std::vector<std::uint8_t> recurrent;
  std::vector<Real> rec_mu, rec_sigma;
  GadgetStats pair_stats;
  std::vector<Real> trainable;

  BasicGadgetParams() = default;
  explicit BasicGadgetParams(std::size_t nr)
      : num_relations(nr), recurrent(nr, 0), rec_mu(nr, Real(0)), rec_sigma(nr, Real(1)),
        trainable(2 * nr + 4 * nr * nr, Real(0)) {
    pair_stats.num_relations = nr;
    for (std::size_t s = 0; s < 2; ++s) {
      pair_stats.count[s].assign(nr * nr, 0);
      pair_stats.mean[s].assign(nr * nr, 0.0f);
      pair_stats.stddev[s].assign(nr * nr, 1.0f);
    }
  }

  std::size_t rec_b_index(RelationId r) const { return static_cast<std::size_t>(r); }
  std::size_t rec_w_index(RelationId r) const { return num_relations + static_cast<std::size_t>(r); }
  std::size_t pair_b_index(Side side, RelationId r, RelationId r2) const {
    return 2 * num_relations + static_cast<std::size_t>(side) * 2 * num_relations * num_relations +
           pair_stats.at(r, r2);
  }
  std::size_t pair_w_index(Side side, RelationId r, RelationId r2) const {
    return pair_b_index(side, r, r2) + num_relations * num_relations;
  }

  double rec_b(RelationId r) const { return trainable[rec_b_index(r)]; }
  double rec_w(RelationId r) const { return trainable[rec_w_index(r)]; }
};

using GadgetParams = BasicGadgetParams<float>;

// Fits recurrence flags, Gaussian gap statistics and pair statistics; trainables start at zero.
template <class Real = float>
BasicGadgetParams<Real> fit_gadgets(const GadgetIndex& index, std::size_t k_rec = 1, double sigma_floor = 1.0) {
  const std::size_t nr = index.num_base_relations();
  BasicGadgetParams<Real> p(nr);
  const auto rec = detect_recurrent_relations(index, k_rec);
  std::vector<double> sum(nr, 0.0), sumsq(nr, 0.0);
  std::vector<std::size_t> n(nr, 0);
  for (const auto& [key, occ] : index.triples()) {
    const auto r = static_cast<std::size_t>(detail::key_relation(key));
    if (!rec[r]) continue;
    const auto ds = detail::distinct(occ.begins);
    if (ds.size() < 2) continue;
    for (Instant t : ds) {
      const double g = static_cast<double>(*detail::closest_gap(ds, t));
      sum[r] += g;
      sumsq[r] += g * g;
      ++n[r];
    }
  }
  for (std::size_t r = 0; r < nr; ++r) {
    p.recurrent[r] = rec[r] ? 1 : 0;
    if (n[r] == 0) {
      p.rec_sigma[r] = static_cast<Real>(sigma_floor);
      continue;
    }
    const double mu = sum[r] / static_cast<double>(n[r]);
    const double var = std::max(0.0, sumsq[r] / static_cast<double>(n[r]) - mu * mu);
    p.rec_mu[r] = static_cast<Real>(mu);
    p.rec_sigma[r] = static_cast<Real>(std::max(sigma_floor, std::sqrt(var)));
  }
  p.pair_stats = fit_pair_statistics(index, sigma_floor);
  return p;
}

// Gradient sink for gadget trainables; null when only the score is needed.
struct GadgetGradSink {
  std::vector<double>* grad = nullptr;
  double scale = 0.0;

  void add(std::size_t i, double v) const {
    if (grad) (*grad)[i] += scale * v;
  }
};

// Recurrence feature of a base-orientation fact. With exclude_begin, one train occurrence
// beginning there is treated as the fact being scored and left out of the evidence.
template <class Real>
double score_recurrence(const GadgetIndex& index, const BasicGadgetParams<Real>& p, EntityId s, RelationId r,
                        EntityId o, const TimeInterval& T, std::optional<Instant> exclude_begin = std::nullopt,
                        GadgetGradSink sink = {}) {
  const auto* occ = index.occurrences(s, r, o);
  if (!occ) return 0.0;
  const Instant t = T.begin;
  std::span<const Instant> begins = occ->begins;
  std::vector<Instant> kept;
  std::size_t total = occ->size();
  if (exclude_begin) {
    auto it = std::find(occ->begins.begin(), occ->begins.end(), *exclude_begin);
    if (it != occ->begins.end()) {
      kept.assign(occ->begins.begin(), occ->begins.end());
      kept.erase(kept.begin() + (it - occ->begins.begin()));
      begins = kept;
      --total;
    }
  }
  if (total == 0) return 0.0;
  sink.add(p.rec_b_index(r), 1.0);
  const double b = p.rec_b(r);
  if (!p.recurrent[static_cast<std::size_t>(r)] || !T.begin_bounded()) return b;
  const auto gap = detail::closest_gap(begins, t);
  if (!gap) return b;
  const double dens = gaussian_density(static_cast<double>(*gap), p.rec_mu[r], p.rec_sigma[r]);
  sink.add(p.rec_w_index(r), dens);
  return p.rec_w(r) * dens + b;
}

// Softmax-weighted average of Gaussian gap features over one side's neighbors.
template <class Real>
double score_pair_side(const GadgetIndex& index, const BasicGadgetParams<Real>& p, Side side, EntityId e,
                       RelationId r, Instant t, GadgetGradSink sink = {}) {
  const auto nb = index.neighbors(side, e);
  const auto sd = static_cast<std::size_t>(side);
  thread_local std::vector<double> logits, scores;
  logits.clear();
  scores.clear();
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& f : nb) {
    if (f.relation == r) continue;
    const double w = p.trainable[p.pair_w_index(side, r, f.relation)];
    const std::size_t k = p.pair_stats.at(r, f.relation);
    double sc = p.trainable[p.pair_b_index(side, r, f.relation)];
    if (p.pair_stats.count[sd][k] > 0) {
      sc += gaussian_density(static_cast<double>(t - f.begin), p.pair_stats.mean[sd][k], p.pair_stats.stddev[sd][k]);
    }
    logits.push_back(w);
    scores.push_back(sc);
    mx = std::max(mx, w);
  }
  if (logits.empty()) return 0.0;
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    z += l;
  }
  double phi = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] /= z;
    phi += logits[i] * scores[i];
  }
  if (sink.grad) {
    std::size_t i = 0;
    for (const auto& f : nb) {
      if (f.relation == r) continue;
      sink.add(p.pair_b_index(side, r, f.relation), logits[i]);
      sink.add(p.pair_w_index(side, r, f.relation), logits[i] * (scores[i] - phi));
      ++i;
    }
  }
  return phi;
}

// Subject-side plus object-side pair feature of a base-orientation fact at instant t.
template <class Real>
double score_pair(const GadgetIndex& index, const BasicGadgetParams<Real>& p, EntityId s, RelationId r, EntityId o,
                  Instant t, GadgetGradSink sink = {}) {
  return score_pair_side(index, p, Side::subject, s, r, t, sink) +
         score_pair_side(index, p, Side::object, o, r, t, sink);
}

// Maps a possibly inverse fact to base orientation.
struct BaseFact {
  EntityId subject;
  RelationId relation;
  EntityId object;
};

inline BaseFact to_base(const GadgetIndex& index, EntityId s, RelationId r, EntityId o) {
  const auto nb = static_cast<RelationId>(index.num_base_relations());
  if (r >= nb) return {o, r - nb, s};
  return {s, r, o};
}

// kappa * pair + lambda * recurrence on the base orientation, both read at begin(T).
template <class Real>
double score_gadgets(const GadgetIndex& index, const BasicGadgetParams<Real>& p, EntityId s, RelationId r,
                     EntityId o, const TimeInterval& T, double kappa, double lambda,
                     std::optional<Instant> exclude_begin = std::nullopt, std::vector<double>* grad = nullptr,
                     double grad_scale = 1.0) {
  const BaseFact b = to_base(index, s, r, o);
  double out = 0.0;
  if (kappa != 0.0) {
    out += kappa * score_pair(index, p, b.subject, b.relation, b.object, T.begin, {grad, grad_scale * kappa});
  }
  if (lambda != 0.0) {
    out += lambda *
           score_recurrence(index, p, b.subject, b.relation, b.object, T, exclude_begin, {grad, grad_scale * lambda});
  }
  return out;
}

// Full score: base interval score + kappa * pair(begin T) + lambda * recurrence(T).
template <class Real, class GReal>
double score_timeplex(const BasicModel<Real>& model, const GadgetIndex& index, const BasicGadgetParams<GReal>& p,
                      EntityId s, RelationId r, EntityId o, const TimeInterval& T, double kappa, double lambda) {
  return score_tx_interval(model, s, r, o, T) + score_gadgets(index, p, s, r, o, T, kappa, lambda);
}

struct OrderingConstraint {
  RelationId earlier = 0;
  RelationId later = 0;
  double confidence = 0.0;
  std::size_t support = 0;
};

// Relation pairs (r1, r2) such that, over subjects having both relations, r1 begins strictly
// before r2 for at least `confidence` of them. Each subject casts one vote: consistent iff every
// r1 fact begins before every r2 fact.
inline std::vector<OrderingConstraint> mine_ordering_constraints(const GadgetIndex& index, double confidence = 0.99,
                                                                 std::size_t min_support = 100) {
  const std::size_t nr = index.num_base_relations();
  std::vector<std::size_t> support(nr * nr, 0), consistent(nr * nr, 0);
  std::vector<Instant> lo(nr), hi(nr);
  std::vector<std::uint8_t> present(nr);
  for (std::size_t e = 0; e < index.num_entities(); ++e) {
    std::fill(present.begin(), present.end(), 0);
    for (const auto& f : index.neighbors(Side::subject, static_cast<EntityId>(e))) {
      const auto r = static_cast<std::size_t>(f.relation);
      if (!present[r]) {
        present[r] = 1;
        lo[r] = hi[r] = f.begin;
      } else {
        lo[r] = std::min(lo[r], f.begin);
        hi[r] = std::max(hi[r], f.begin);
      }
    }
    for (std::size_t a = 0; a < nr; ++a) {
      if (!present[a]) continue;
      for (std::size_t b = 0; b < nr; ++b) {
        if (a == b || !present[b]) continue;
        ++support[a * nr + b];
        if (hi[a] < lo[b]) ++consistent[a * nr + b];
      }
    }
  }
  std::vector<OrderingConstraint> out;
  for (std::size_t a = 0; a < nr; ++a) {
    for (std::size_t b = 0; b < nr; ++b) {
      const std::size_t n = support[a * nr + b];
      if (a == b || n == 0 || n < min_support) continue;
      const double c = static_cast<double>(consistent[a * nr + b]) / static_cast<double>(n);
      if (c >= confidence) out.push_back({static_cast<RelationId>(a), static_cast<RelationId>(b), c, n});
    }
  }
  return out;
}

inline std::vector<OrderingConstraint> mine_ordering_constraints(const TemporalKB& kb, double confidence = 0.99,
                                                                 std::size_t min_support = 100) {
  return mine_ordering_constraints(GadgetIndex(kb), confidence, min_support);
}

inline nlohmann::json constraints_to_json(const std::vector<OrderingConstraint>& cs, const Vocabulary& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cs) {
    arr.push_back({{"earlier", v.relation_name(c.earlier)},
                   {"later", v.relation_name(c.later)},
                   {"confidence", c.confidence},
                   {"support", c.support}});
  }
  return {{"constraints", arr}};
}

inline std::vector<OrderingConstraint> constraints_from_json(const nlohmann::json& j, const Vocabulary& v) {
  std::vector<OrderingConstraint> out;
  try {
    for (const auto& c : j.at("constraints")) {
      const auto a = v.find_relation(c.at("earlier").get<std::string>());
      const auto b = v.find_relation(c.at("later").get<std::string>());
      if (!a || !b) throw ParseError("constraint names an unknown relation");
      out.push_back({*a, *b, c.at("confidence").get<double>(), c.at("support").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("constraints file: ") + e.what());
  }
  return out;
}

}  // namespace tkbc
