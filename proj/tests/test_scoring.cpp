#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "tkbc/scoring.hpp"

using namespace tkbc;
using cd = std::complex<double>;

namespace {

// Independent oracle: Re(sum a * b * conj(c)) with std::complex.
double oracle_product(const std::vector<cd>& a, const std::vector<cd>& b, const std::vector<cd>& c) {
  cd acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i] * std::conj(c[i]);
  return acc.real();
}

std::vector<cd> row_of(const BasicModel<double>& m, Table t, std::size_t i) {
  const auto r = m.row(t, i);
  std::vector<cd> out;
  for (std::size_t d = 0; d < r.dim; ++d) out.emplace_back(r.re[d], r.im[d]);
  return out;
}

double oracle_tx(const BasicModel<double>& m, std::size_t s, std::size_t r, std::size_t o, std::size_t t) {
  const auto& w = m.weights();
  const auto S = row_of(m, Table::entity, s), O = row_of(m, Table::entity, o), T = row_of(m, Table::time, t);
  return oracle_product(S, row_of(m, Table::rel_so, r), O) +
         w.alpha * oracle_product(S, row_of(m, Table::rel_st, r), T) +
         w.beta * oracle_product(O, row_of(m, Table::rel_ot, r), T) + w.gamma * oracle_product(S, O, T);
}

BasicModel<double> random_model(std::size_t ne, std::size_t nr, std::size_t nt, std::size_t dim, unsigned seed,
                                HyperWeights w = {5, 5, 2}) {
  BasicModel<double> m({ne, nr, nt, dim}, w);
  std::mt19937_64 rng(seed);
  m.randomize(rng, 0.5);
  return m;
}

ComplexVec vec(std::initializer_list<cd> xs) {
  ComplexVec v(xs.size());
  std::size_t i = 0;
  for (auto x : xs) {
    v.re[i] = x.real();
    v.im[i] = x.imag();
    ++i;
  }
  return v;
}

}  // namespace

TEST(ThreeWayProduct, GoldenValues) {
  const auto ones = vec({{1, 0}, {1, 0}});
  EXPECT_DOUBLE_EQ(three_way_product(ones.view(), ones.view(), ones.view()), 2.0);
  const auto i = vec({{0, 1}}), one = vec({{1, 0}});
  EXPECT_DOUBLE_EQ(three_way_product(i.view(), i.view(), one.view()), -1.0);
  const auto zero = vec({{0, 0}, {0, 0}}), x = vec({{0.3, -2}, {1.5, 0.25}});
  EXPECT_DOUBLE_EQ(three_way_product(zero.view(), x.view(), x.view()), 0.0);
  EXPECT_DOUBLE_EQ(three_way_product(x.view(), x.view(), zero.view()), 0.0);
}

TEST(ThreeWayProduct, DimensionMismatchThrows) {
  const auto a = vec({{1, 0}}), b = vec({{1, 0}, {0, 1}});
  EXPECT_THROW(three_way_product(a.view(), b.view(), b.view()), RangeError);
}

TEST(ThreeWayProduct, MatchesComplexOracleAndConjugateSwap) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 6;
    std::vector<cd> a(d), b(d), c(d);
    ComplexVec va(d), vb(d), vc(d), vbc(d);
    for (std::size_t k = 0; k < d; ++k) {
      a[k] = {g(rng), g(rng)};
      b[k] = {g(rng), g(rng)};
      c[k] = {g(rng), g(rng)};
      va.re[k] = a[k].real(), va.im[k] = a[k].imag();
      vb.re[k] = b[k].real(), vb.im[k] = b[k].imag();
      vc.re[k] = c[k].real(), vc.im[k] = c[k].imag();
      vbc.re[k] = b[k].real(), vbc.im[k] = -b[k].imag();
    }
    const double v = three_way_product(va.view(), vb.view(), vc.view());
    ASSERT_NEAR(v, oracle_product(a, b, c), 1e-12);
    // Re<s, r, conj(o)> = Re<o, conj(r), conj(s)>
    ASSERT_NEAR(v, three_way_product(vc.view(), vbc.view(), va.view()), 1e-12);
  }
}

TEST(Score, ZeroModelScoresZero) {
  BasicModel<double> m({3, 2, 4, 2}, {});
  EXPECT_EQ(score_cx(m, 0, 1, 2), 0.0);
  EXPECT_EQ(score_tx_instant(m, 0, 1, 2, 3), 0.0);
}

TEST(Score, IdsOutOfRangeThrow) {
  BasicModel<double> m({3, 2, 4, 2}, {});
  EXPECT_THROW(score_cx(m, 3, 0, 0), RangeError);
  EXPECT_THROW(score_cx(m, 0, 2, 0), RangeError);
  EXPECT_THROW(score_tx_instant(m, 0, 0, 0, 4), RangeError);
}

TEST(Score, OneDimensionalHandSetOracle) {
  BasicModel<double> m({2, 1, 1, 1}, {5, 5, 5});
  auto set = [&](Table t, std::size_t i, cd v) {
    auto r = m.row(t, i);
    r.re[0] = v.real();
    r.im[0] = v.imag();
  };
  const cd s{1, 2}, o{0.5, -1}, rso{2, 0}, rst{0, 1}, rot{1, 1}, t{-1, 0.5};
  set(Table::entity, 0, s);
  set(Table::entity, 1, o);
  set(Table::rel_so, 0, rso);
  set(Table::rel_st, 0, rst);
  set(Table::rel_ot, 0, rot);
  set(Table::time, 0, t);
  const double so = (s * rso * std::conj(o)).real();
  const double st = (s * rst * std::conj(t)).real();
  const double ot = (o * rot * std::conj(t)).real();
  const double sot = (s * o * std::conj(t)).real();
  EXPECT_NEAR(score_cx(m, 0, 0, 1), so, 1e-12);
  EXPECT_NEAR(score_tx_instant(m, 0, 0, 1, 0), so + 5 * st + 5 * ot + 5 * sot, 1e-12);
}

TEST(Score, DegenerateWeightsAndZeroTime) {
  auto m = random_model(4, 2, 3, 3, 1, {0, 0, 0});
  for (int t = 0; t < 3; ++t) EXPECT_NEAR(score_tx_instant(m, 0, 1, 2, t), score_cx(m, 0, 1, 2), 1e-12);
  auto m2 = random_model(4, 2, 3, 3, 1);
  auto tr = m2.row(Table::time, 1);
  std::fill(tr.re, tr.re + 3, 0.0);
  std::fill(tr.im, tr.im + 3, 0.0);
  EXPECT_NEAR(score_tx_instant(m2, 0, 1, 2, 1), score_cx(m2, 0, 1, 2), 1e-12);
}

TEST(Score, InstantScoreMatchesOracle) {
  const auto m = random_model(4, 3, 5, 4, 2);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t o = 0; o < 4; ++o)
        for (std::size_t t = 0; t < 5; ++t)
          ASSERT_NEAR(score_tx_instant(m, s, r, o, t), oracle_tx(m, s, r, o, t), 1e-12);
}

TEST(Score, IntervalIsSumAndAdditive) {
  const auto m = random_model(3, 2, 8, 2, 3);
  EXPECT_NEAR(score_tx_interval(m, 0, 1, 2, {4, 4}), score_tx_instant(m, 0, 1, 2, 4), 1e-12);
  EXPECT_NEAR(score_tx_interval(m, 0, 1, 2, {3, 5}),
              score_tx_instant(m, 0, 1, 2, 3) + score_tx_instant(m, 0, 1, 2, 4) + score_tx_instant(m, 0, 1, 2, 5),
              1e-12);
  for (Instant a = 0; a < 8; ++a)
    for (Instant c = a; c < 8; ++c)
      for (Instant b = a; b < c; ++b)
        ASSERT_NEAR(score_tx_interval(m, 1, 0, 2, {a, c}),
                    score_tx_interval(m, 1, 0, 2, {a, b}) + score_tx_interval(m, 1, 0, 2, {b + 1, c}), 1e-10);
  EXPECT_THROW(score_tx_interval(m, 0, 0, 0, {5, 4}), RangeError);
  EXPECT_THROW(score_tx_interval(m, 0, 0, 0, {0, kPosUnbounded}), RangeError);
}

// Holding the other arguments fixed, the score is linear in each embedding.
TEST(Score, LinearInEachEmbedding) {
  auto m = random_model(3, 1, 2, 2, 4);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const std::pair<Table, std::size_t> slots[] = {{Table::entity, 0}, {Table::entity, 2}, {Table::rel_so, 0},
                                                 {Table::rel_st, 0}, {Table::rel_ot, 0}, {Table::time, 1}};
  for (auto [table, idx] : slots) {
    auto row = m.row(table, idx);
    std::vector<double> x(4), y(4);
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = g(rng);
    auto put = [&](const std::vector<double>& v) {
      row.re[0] = v[0], row.re[1] = v[1], row.im[0] = v[2], row.im[1] = v[3];
      return score_tx_instant(m, 0, 0, 2, 1);
    };
    const double a = 0.7, b = -1.3;
    std::vector<double> z(4), zero(4, 0.0);
    for (int k = 0; k < 4; ++k) z[k] = a * x[k] + b * y[k];
    const double f0 = put(zero);
    const double fx = put(x) - f0, fy = put(y) - f0, fz = put(z) - f0;
    EXPECT_NEAR(fz, a * fx + b * fy, 1e-10);
  }
}

TEST(Vectorized, ObjectsSubjectsTimesMatchLoops) {
  const auto m = random_model(5, 3, 4, 3, 6);
  for (std::size_t r = 0; r < 3; ++r) {
    for (Instant t = 0; t < 4; ++t) {
      const auto objs = score_all_objects(m, 1, r, t);
      const auto subs = score_all_subjects(m, r, 2, make_time_arg(m, t));
      for (std::size_t e = 0; e < 5; ++e) {
        ASSERT_NEAR(objs[e], score_tx_instant(m, 1, r, e, t), 1e-9 * (1 + std::abs(objs[e])));
        ASSERT_NEAR(subs[e], score_tx_instant(m, e, r, 2, t), 1e-9 * (1 + std::abs(subs[e])));
      }
    }
    const auto iv = score_all_objects(m, 0, r, TimeInterval{1, 3});
    for (std::size_t e = 0; e < 5; ++e) ASSERT_NEAR(iv[e], score_tx_interval(m, 0, r, e, {1, 3}), 1e-9);
    const auto times = score_all_times(m, 3, r, 4);
    for (std::size_t t = 0; t < 4; ++t) ASSERT_NEAR(times[t], score_tx_instant(m, 3, r, 4, t), 1e-9);
  }
}

TEST(Vectorized, ArgmaxAgreesWithLoop) {
  const auto m = random_model(7, 1, 2, 2, 8);
  const auto v = score_all_objects(m, 0, 0, Instant{1});
  std::size_t best = 0;
  for (std::size_t e = 1; e < 7; ++e)
    if (score_tx_instant(m, 0, 0, e, 1) > score_tx_instant(m, 0, 0, best, 1)) best = e;
  EXPECT_EQ(static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()), best);
}

TEST(Vectorized, ZeroEntityTableGivesConstantObjects) {
  auto m = random_model(3, 1, 2, 2, 10);
  auto p = m.parameters();
  const auto& lay = m.layout();
  std::fill(p.begin() + lay.offset(Table::entity), p.begin() + lay.offset(Table::entity) + lay.table_size(Table::entity),
            0.0);
  for (double v : score_all_objects(m, 0, 0, Instant{0})) EXPECT_EQ(v, 0.0);
}

TEST(Vectorized, TimesConstantWithoutTimeWeights) {
  const auto m = random_model(3, 1, 4, 2, 12, {0, 0, 0});
  const auto v = score_all_times(m, 0, 0, 1);
  for (double x : v) EXPECT_NEAR(x, v[0], 1e-12);
}

TEST(ParameterCount, MatchesClosedForm) {
  for (std::size_t e : {1, 7, 60})
    for (std::size_t t : {1, 5, 90})
      for (std::size_t b : {1, 4, 10})
        for (std::size_t d : {1, 2, 8}) {
          const Model m({e, 2 * b, t, d}, {});
          ASSERT_EQ(m.parameter_count(), 2 * d * (e + t + 6 * b));
          ASSERT_EQ(m.parameter_count(), expected_parameter_count(e, t, b, d));
        }
}
