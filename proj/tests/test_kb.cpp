#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "tkbc/dataset.hpp"
#include "tkbc/kb.hpp"

using namespace tkbc;
using tkbc::testing::KbBuilder;
using tkbc::testing::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

void write_folds(const std::filesystem::path& dir, const std::string& train, const std::string& valid = "",
                 const std::string& test = "") {
  write_file(dir / "train.txt", train);
  write_file(dir / "valid.txt", valid);
  write_file(dir / "test.txt", test);
}

DatasetConfig config_for(const std::filesystem::path& dir) {
  DatasetConfig c;
  c.path = dir;
  return c;
}

}  // namespace

TEST(Dataset, ParsesYearIntervals) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t1992\t2003\n", "A\tr\tC\t1990\t1991\n");
  auto cfg = config_for(dir.path());
  cfg.add_inverse = false;
  const auto kb = parse_dataset(cfg);
  ASSERT_EQ(kb.train().size(), 1u);
  const Fact& f = kb.train()[0];
  EXPECT_EQ(kb.vocab().entity_name(f.subject), "A");
  EXPECT_EQ(kb.vocab().relation_name(f.relation), "r");
  EXPECT_EQ(kb.vocab().entity_name(f.object), "B");
  // Instant ids are offsets from the earliest label (1990).
  EXPECT_EQ(f.interval, (TimeInterval{2, 13}));
  EXPECT_EQ(kb.vocab().instant_label(f.interval.begin), "1992");
  EXPECT_EQ(kb.domain().first, 0);
  EXPECT_EQ(kb.domain().last, 13);
  EXPECT_EQ(kb.num_entities(), 3u);
}

TEST(Dataset, MissingEndpointBecomesUnbounded) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t1995\t-\nA\tr\tC\t-\t1999\nA\tr\tD\t19##\t2000\n");
  auto cfg = config_for(dir.path());
  cfg.add_inverse = false;
  const auto kb = parse_dataset(cfg);
  EXPECT_FALSE(kb.train()[0].interval.end_bounded());
  EXPECT_TRUE(kb.train()[0].interval.begin_bounded());
  EXPECT_FALSE(kb.train()[1].interval.begin_bounded());
  EXPECT_FALSE(kb.train()[2].interval.begin_bounded());
}

TEST(Dataset, WrongColumnCountNamesTheLine) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t1992\t2003\nA\tr\tB\t1992\n");
  try {
    parse_dataset(config_for(dir.path()));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("train.txt:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("expected 5 columns, got 4"), std::string::npos) << msg;
  }
}

TEST(Dataset, OutOfRangeLabelIsRangeError) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t99999999999999999999\t2003\n");
  EXPECT_THROW(parse_dataset(config_for(dir.path())), RangeError);
  write_folds(dir.path(), "A\tr\tB\t2000000\t2003\n");
  EXPECT_THROW(parse_dataset(config_for(dir.path())), RangeError);
}

TEST(Dataset, MalformedLabelIsParseError) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t19x2\t2003\n");
  EXPECT_THROW(parse_dataset(config_for(dir.path())), ParseError);
}

TEST(Dataset, InvertedIntervalPolicies) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t2003\t1992\n");
  auto cfg = config_for(dir.path());
  cfg.add_inverse = false;
  EXPECT_THROW(parse_dataset(cfg), ParseError);
  cfg.inverted_intervals = InvertedIntervalPolicy::swap;
  EXPECT_EQ(parse_dataset(cfg).train()[0].interval, (TimeInterval{0, 11}));
}

TEST(Dataset, DayGranularityAndConfigFile) {
  TempDir dir;
  write_folds(dir.path(), "A\tr\tB\t2014-01-30\n", "", "A\tr\tC\t2014-02-02\n");
  write_file(dir.path() / "dataset.json",
             R"({"granularity": "day", "columns": ["subject", "relation", "object", "time"], "add_inverse": false})");
  const auto kb = parse_dataset(load_dataset_config(dir.path()));
  EXPECT_EQ(kb.train()[0].interval, (TimeInterval{0, 0}));
  EXPECT_EQ(kb.test()[0].interval, (TimeInterval{3, 3}));
  EXPECT_EQ(kb.vocab().instant_label(3), "2014-02-02");
  EXPECT_EQ(kb.num_instants(), 4u);

  write_folds(dir.path(), "A\tr\tB\t2014-02-30\n");
  EXPECT_THROW(parse_dataset(load_dataset_config(dir.path())), RangeError);
}

TEST(Dataset, RoundTripPreservesFactMultisets) {
  TempDir src, dst;
  write_folds(src.path(), "A\tr\tB\t1992\t2003\nA\tr\tB\t1992\t2003\nB\ts\tC\t-\t2001\n", "C\tr\tA\t2000\t2000\n",
              "A\ts\tC\t1999\t-\n");
  const auto kb = parse_dataset(config_for(src.path()));
  write_dataset(kb, dst.path());
  const auto kb2 = parse_dataset(config_for(dst.path()));
  auto as_names = [](const TemporalKB& k, Fold fold) {
    std::multiset<std::tuple<std::string, std::string, std::string, std::string, std::string>> out;
    const auto& v = k.vocab();
    for (const auto& f : k.fold(fold)) {
      out.insert({v.entity_name(f.subject), v.relation_name(f.relation), v.entity_name(f.object),
                  v.instant_label(f.interval.begin), v.instant_label(f.interval.end)});
    }
    return out;
  };
  for (Fold fold : {Fold::train, Fold::dev, Fold::test}) EXPECT_EQ(as_names(kb, fold), as_names(kb2, fold));
}

TEST(Inverse, DoublesTrainAndRelations) {
  const auto kb = KbBuilder().train("A", "r", "B", 0, 1).build({0, 1}, false);
  const auto inv = add_inverse_facts(kb);
  EXPECT_EQ(inv.train().size(), 2u);
  EXPECT_EQ(inv.num_relations(), 2u);
  EXPECT_EQ(inv.vocab().relation_name(1), "r^-1");
  const Fact& f = inv.train()[1];
  EXPECT_EQ(f.subject, kb.train()[0].object);
  EXPECT_EQ(f.object, kb.train()[0].subject);
  EXPECT_THROW(add_inverse_facts(inv), Error);
}

TEST(Inverse, TenRelationsBecomeTwenty) {
  KbBuilder b;
  for (int r = 0; r < 10; ++r) b.train("A", "r" + std::to_string(r), "B", 0, 0);
  const auto kb = b.build({0, 0});
  EXPECT_EQ(kb.num_relations(), 20u);
  EXPECT_EQ(kb.vocab().num_base_relations(), 10u);
  for (RelationId r = 0; r < 20; ++r) EXPECT_EQ(kb.vocab().inverse_of(kb.vocab().inverse_of(r)), r);
}

TEST(Inverse, PropertyDoublesTrainFoldOnRandomKbs) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    KbBuilder b;
    const int nr = 1 + trial % 5;
    const int nf = 1 + trial;
    for (int i = 0; i < nf; ++i) {
      b.train("e" + std::to_string(rng() % 7), "r" + std::to_string(i % nr), "e" + std::to_string(rng() % 7), 0, 3);
    }
    b.add(Fold::test, "e0", "r0", "e1", 1, 2);
    const auto base = b.build({0, 3}, false);
    const auto inv = add_inverse_facts(base);
    ASSERT_EQ(inv.train().size(), 2 * base.train().size());
    ASSERT_EQ(inv.num_relations(), 2 * base.num_relations());
    ASSERT_EQ(inv.test().size(), base.test().size());
  }
}

TEST(KbIndex, TripleAndSubjectIndicesAgreeWithFacts) {
  const auto kb = KbBuilder()
                      .train("A", "r", "B", 0, 2)
                      .train("A", "r", "B", 5, 6)
                      .train("A", "s", "C", 1, 1)
                      .build({0, 6});
  const auto A = *kb.vocab().find_entity("A"), B = *kb.vocab().find_entity("B");
  const auto r = *kb.vocab().find_relation("r");
  EXPECT_EQ(kb.train_intervals(A, r, B).size(), 2u);
  EXPECT_TRUE(kb.train_asserts(A, r, B, 5));
  EXPECT_FALSE(kb.train_asserts(A, r, B, 3));
  for (std::size_t idx : kb.train_facts_of(A)) EXPECT_EQ(kb.train()[idx].subject, A);
  EXPECT_EQ(kb.train_facts_of(A).size(), 3u);
}

TEST(Instants, EnumerateClipsToDomain) {
  const InstantDomain d{0, 9};
  auto times = [&](TimeInterval T) {
    std::vector<Instant> out;
    for (const auto& x : enumerate_instant_facts({0, 0, 1, T}, d)) out.push_back(x.time);
    return out;
  };
  EXPECT_EQ(times({3, 5}), (std::vector<Instant>{3, 4, 5}));
  EXPECT_EQ(times({7, 7}), (std::vector<Instant>{7}));
  EXPECT_EQ(times({6, kPosUnbounded}), (std::vector<Instant>{6, 7, 8, 9}));
  for (Instant a = 0; a < 10; ++a) {
    for (Instant b = a; b < 10; ++b) {
      ASSERT_EQ(static_cast<Instant>(times({a, b}).size()), interval_volume(*clip({a, b}, d)));
    }
  }
}

TEST(Instants, SampleIsUniformOverClippedInterval) {
  std::mt19937_64 rng(11);
  const InstantDomain d{0, 20};
  EXPECT_EQ(sample_instant({0, 0, 1, {7, 7}}, d, rng), 7);
  std::map<Instant, int> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++freq[sample_instant({0, 0, 1, {0, 9}}, d, rng)];
  ASSERT_EQ(freq.size(), 10u);
  for (const auto& [t, n] : freq) EXPECT_NEAR(n / double(draws), 0.1, 0.01) << "instant " << t;
  for (int i = 0; i < 1000; ++i) {
    const auto t = sample_instant({0, 0, 1, {15, kPosUnbounded}}, d, rng);
    ASSERT_GE(t, 15);
    ASSERT_LE(t, 20);
  }
  EXPECT_THROW(sample_instant({0, 0, 1, {30, 40}}, d, rng), RangeError);
}
