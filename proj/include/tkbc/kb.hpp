#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tkbc/error.hpp"
#include "tkbc/interval.hpp"

namespace tkbc {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

enum class Granularity { year, day };

inline const char* to_string(Granularity g) { return g == Granularity::year ? "year" : "day"; }

inline Granularity granularity_from_string(std::string_view s) {
  if (s == "year") return Granularity::year;
  if (s == "day") return Granularity::day;
  throw ParseError("unknown granularity '" + std::string(s) + "' (expected year|day)");
}

// Suffix appended to a relation name to name its inverse.
inline constexpr std::string_view kInverseSuffix = "^-1";

// Name <-> id maps for entities and relations, plus the instant calendar.
class Vocabulary {
 public:
  static constexpr std::size_t kMaxEntities = std::size_t{1} << 24;
  static constexpr std::size_t kMaxRelations = std::size_t{1} << 15;

  EntityId intern_entity(std::string_view name) {
    return intern(name, entity_ids_, entity_names_, kMaxEntities, "entities");
  }

  RelationId intern_relation(std::string_view name) {
    if (has_inverses_) throw Error("cannot add relations after inverse relations were allocated");
    const auto id = intern(name, relation_ids_, relation_names_, kMaxRelations / 2, "relations");
    base_relations_ = relation_names_.size();
    return id;
  }

  std::optional<EntityId> find_entity(std::string_view name) const { return find(name, entity_ids_); }
  std::optional<RelationId> find_relation(std::string_view name) const { return find(name, relation_ids_); }

  const std::string& entity_name(EntityId e) const { return entity_names_.at(static_cast<std::size_t>(e)); }
  const std::string& relation_name(RelationId r) const { return relation_names_.at(static_cast<std::size_t>(r)); }

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }
  std::size_t num_base_relations() const { return base_relations_; }
  bool has_inverses() const { return has_inverses_; }

  // Allocates r + |R| for every base relation r.
  void add_inverse_relations() {
    if (has_inverses_) throw Error("inverse relations already allocated");
    const std::size_t n = relation_names_.size();
    for (std::size_t r = 0; r < n; ++r) {
      std::string name = relation_names_[r];
      name += kInverseSuffix;
      relation_ids_.emplace(name, static_cast<RelationId>(relation_names_.size()));
      relation_names_.push_back(std::move(name));
    }
    has_inverses_ = true;
  }

  bool is_inverse(RelationId r) const { return static_cast<std::size_t>(r) >= base_relations_; }

  RelationId inverse_of(RelationId r) const {
    if (!has_inverses_) throw Error("vocabulary has no inverse relations");
    const auto b = static_cast<RelationId>(base_relations_);
    return r < b ? r + b : r - b;
  }

  RelationId base_of(RelationId r) const {
    const auto b = static_cast<RelationId>(base_relations_);
    return r < b ? r : r - b;
  }

  // Calendar: instant id i corresponds to label value origin + i.
  Granularity granularity = Granularity::year;
  Instant label_origin = 0;

  std::string instant_label(Instant t) const {
    if (t == kNegUnbounded || t == kPosUnbounded) return {};
    const Instant v = label_origin + t;
    if (granularity == Granularity::year) return std::to_string(v);
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{v}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

 private:
  using Index = std::unordered_map<std::string, std::int32_t>;

  static std::int32_t intern(std::string_view name, Index& ids, std::vector<std::string>& names,
                             std::size_t limit, const char* what) {
    auto it = ids.find(std::string(name));
    if (it != ids.end()) return it->second;
    if (names.size() >= limit) throw RangeError(std::string("too many ") + what);
    const auto id = static_cast<std::int32_t>(names.size());
    ids.emplace(std::string(name), id);
    names.emplace_back(name);
    return id;
  }

  static std::optional<std::int32_t> find(std::string_view name, const Index& ids) {
    auto it = ids.find(std::string(name));
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }

  Index entity_ids_;
  Index relation_ids_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::size_t base_relations_ = 0;
  bool has_inverses_ = false;
};

struct Fact {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;
  TimeInterval interval;

  friend bool operator==(const Fact&, const Fact&) = default;
};

// A fact reduced to a single instant.
struct InstantFact {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;
  Instant time = 0;

  friend bool operator==(const InstantFact&, const InstantFact&) = default;
};

enum class Fold { train = 0, dev = 1, test = 2 };

inline std::uint64_t triple_key(EntityId s, RelationId r, EntityId o) {
  return (static_cast<std::uint64_t>(s) << 40) | (static_cast<std::uint64_t>(r) << 24) |
         static_cast<std::uint64_t>(o);
}

// Immutable fact store with train/dev/test folds and train-fold indices.
class TemporalKB {
 public:
  TemporalKB() = default;

  TemporalKB(Vocabulary vocab, std::array<std::vector<Fact>, 3> folds, InstantDomain domain)
      : vocab_(std::move(vocab)), folds_(std::move(folds)), domain_(domain) {
    for (const auto& fold : folds_) {
      for (const auto& f : fold) validate(f);
    }
    build_indices();
  }

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<Fact>& fold(Fold f) const { return folds_[static_cast<std::size_t>(f)]; }
  const std::vector<Fact>& train() const { return fold(Fold::train); }
  const std::vector<Fact>& dev() const { return fold(Fold::dev); }
  const std::vector<Fact>& test() const { return fold(Fold::test); }
  InstantDomain domain() const { return domain_; }
  std::size_t num_instants() const { return static_cast<std::size_t>(domain_.size()); }
  std::size_t num_entities() const { return vocab_.num_entities(); }
  std::size_t num_relations() const { return vocab_.num_relations(); }
  bool has_inverses() const { return vocab_.has_inverses(); }

  // Train-fold intervals asserted for (s, r, o).
  std::span<const TimeInterval> train_intervals(EntityId s, RelationId r, EntityId o) const {
    auto it = by_triple_.find(triple_key(s, r, o));
    if (it == by_triple_.end()) return {};
    return it->second;
  }

  // Indices into train() of facts whose subject is s.
  std::span<const std::size_t> train_facts_of(EntityId s) const {
    auto it = by_subject_.find(s);
    if (it == by_subject_.end()) return {};
    return it->second;
  }

  bool train_asserts(EntityId s, RelationId r, EntityId o, Instant t) const {
    for (const auto& iv : train_intervals(s, r, o)) {
      if (iv.contains(t)) return true;
    }
    return false;
  }

  friend TemporalKB add_inverse_facts(const TemporalKB& kb);

 private:
  void validate(const Fact& f) const {
    if (f.subject < 0 || static_cast<std::size_t>(f.subject) >= vocab_.num_entities() || f.object < 0 ||
        static_cast<std::size_t>(f.object) >= vocab_.num_entities()) {
      throw RangeError("fact references unknown entity id");
    }
    if (f.relation < 0 || static_cast<std::size_t>(f.relation) >= vocab_.num_relations()) {
      throw RangeError("fact references unknown relation id");
    }
  }

  void build_indices() {
    by_triple_.clear();
    by_subject_.clear();
    const auto& tr = train();
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const Fact& f = tr[i];
      by_triple_[triple_key(f.subject, f.relation, f.object)].push_back(f.interval);
      by_subject_[f.subject].push_back(i);
    }
  }

  Vocabulary vocab_;
  std::array<std::vector<Fact>, 3> folds_;
  InstantDomain domain_;
  std::unordered_map<std::uint64_t, std::vector<TimeInterval>> by_triple_;
  std::unordered_map<EntityId, std::vector<std::size_t>> by_subject_;
};

// Adds (o, r^-1, s, T) for every train fact (s, r, o, T). Dev and test are untouched.
inline TemporalKB add_inverse_facts(const TemporalKB& kb) {
  if (kb.has_inverses()) throw Error("add_inverse_facts: knowledge base already has inverse facts");
  Vocabulary vocab = kb.vocab_;
  vocab.add_inverse_relations();
  auto folds = kb.folds_;
  auto& train = folds[0];
  const std::size_t n = train.size();
  train.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Fact f = train[i];
    train.push_back({f.object, vocab.inverse_of(f.relation), f.subject, f.interval});
  }
  return TemporalKB(std::move(vocab), std::move(folds), kb.domain_);
}

// All (s, r, o, t) for t in the fact interval clipped to the domain.
inline std::vector<InstantFact> enumerate_instant_facts(const Fact& f, const InstantDomain& domain) {
  std::vector<InstantFact> out;
  const auto c = clip(f.interval, domain);
  if (!c) return out;
  out.reserve(static_cast<std::size_t>(c->end - c->begin + 1));
  for (Instant t = c->begin; t <= c->end; ++t) out.push_back({f.subject, f.relation, f.object, t});
  return out;
}

// Uniform instant from the fact interval clipped to the domain.
template <class Rng>
Instant sample_instant(const Fact& f, const InstantDomain& domain, Rng& rng) {
  const auto c = clip(f.interval, domain);
  if (!c) throw RangeError("sample_instant: interval does not intersect the instant domain");
  if (c->begin == c->end) return c->begin;
  std::uniform_int_distribution<Instant> pick(c->begin, c->end);
  return pick(rng);
}

}  // namespace tkbc
