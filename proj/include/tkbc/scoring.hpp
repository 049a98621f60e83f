#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tkbc/error.hpp"
#include "tkbc/interval.hpp"
#include "tkbc/model.hpp"

namespace tkbc {

namespace detail {

template <class Real>
void check_ids(const BasicModel<Real>& m, long long s, long long r, long long o) {
  const auto& sh = m.shape();
  if (s < 0 || static_cast<std::size_t>(s) >= sh.num_entities) throw RangeError("subject id out of range");
  if (o < 0 || static_cast<std::size_t>(o) >= sh.num_entities) throw RangeError("object id out of range");
  if (r < 0 || static_cast<std::size_t>(r) >= sh.num_relations) throw RangeError("relation id out of range");
}

template <class Real>
void check_instant(const BasicModel<Real>& m, Instant t) {
  if (t < 0 || static_cast<std::size_t>(t) >= m.shape().num_instants) throw RangeError("instant id out of range");
}

}  // namespace detail

// Time argument of the base score: the sum of instant embeddings over an interval and the
// number of instants summed. The score is linear in the time embedding, so scoring against
// the sum equals summing instant scores.
struct TimeArg {
  ComplexVec sum;
  double count = 1.0;
};

template <class Real>
TimeArg make_time_arg(const BasicModel<Real>& m, Instant t) {
  detail::check_instant(m, t);
  TimeArg a{ComplexVec(m.dim()), 1.0};
  a.sum.add(m.time(static_cast<std::size_t>(t)));
  return a;
}

template <class Real>
TimeArg make_time_arg(const BasicModel<Real>& m, const TimeInterval& T) {
  require_bounded(T, "time argument");
  detail::check_instant(m, T.begin);
  detail::check_instant(m, T.end);
  TimeArg a{ComplexVec(m.dim()), static_cast<double>(T.end - T.begin + 1)};
  for (Instant t = T.begin; t <= T.end; ++t) a.sum.add(m.time(static_cast<std::size_t>(t)));
  return a;
}

// Time-agnostic score Re<s, r_SO, conj(o)>.
template <class Real>
double score_cx(const BasicModel<Real>& m, long long s, long long r, long long o) {
  detail::check_ids(m, s, r, o);
  return three_way_product(m.entity(s), m.rel_so(r), m.entity(o));
}

template <class Real>
double score_tx_instant(const BasicModel<Real>& m, long long s, long long r, long long o, Instant t) {
  detail::check_ids(m, s, r, o);
  detail::check_instant(m, t);
  const auto& w = m.weights();
  const auto S = m.entity(s), O = m.entity(o), T = m.time(t);
  return three_way_product(S, m.rel_so(r), O) + w.alpha * three_way_product(S, m.rel_st(r), T) +
         w.beta * three_way_product(O, m.rel_ot(r), T) + w.gamma * three_way_product(S, O, T);
}

// Sum of instant scores over a bounded interval.
template <class Real>
double score_tx_interval(const BasicModel<Real>& m, long long s, long long r, long long o, const TimeInterval& T) {
  require_bounded(T, "score_tx_interval");
  if (T.end < T.begin) throw RangeError("score_tx_interval: empty interval");
  double acc = 0.0;
  for (Instant t = T.begin; t <= T.end; ++t) acc += score_tx_instant(m, s, r, o, t);
  return acc;
}

// Score as an affine function of one candidate embedding: constant + <coef.re, c.re> + <coef.im, c.im>.
struct LinearForm {
  ComplexVec coef;
  double constant = 0.0;

  template <class T>
  double eval(ComplexRow<T> c) const {
    double acc = constant;
    for (std::size_t d = 0; d < c.dim; ++d) {
      acc += coef.re[d] * static_cast<double>(c.re[d]) + coef.im[d] * static_cast<double>(c.im[d]);
    }
    return acc;
  }
};

// Object slot free: SO term (s, r_SO, o), OT term (o, r_OT, t), SOT term (s, o, t); ST is constant.
template <class Real>
LinearForm object_form(const BasicModel<Real>& m, long long s, long long r, const TimeArg& t) {
  detail::check_ids(m, s, r, 0);
  const auto& w = m.weights();
  const auto S = m.entity(s);
  LinearForm f{ComplexVec(m.dim()), 0.0};
  add_grad_third(S, m.rel_so(r), t.count, f.coef.view());
  add_grad_first(m.rel_ot(r), t.sum.view(), w.beta, f.coef.view());
  add_grad_second(S, t.sum.view(), w.gamma, f.coef.view());
  f.constant = w.alpha * three_way_product(S, m.rel_st(r), t.sum.view());
  return f;
}

// Subject slot free: SO, ST and SOT terms carry s; OT is constant.
template <class Real>
LinearForm subject_form(const BasicModel<Real>& m, long long r, long long o, const TimeArg& t) {
  detail::check_ids(m, 0, r, o);
  const auto& w = m.weights();
  const auto O = m.entity(o);
  LinearForm f{ComplexVec(m.dim()), 0.0};
  add_grad_first(m.rel_so(r), O, t.count, f.coef.view());
  add_grad_first(m.rel_st(r), t.sum.view(), w.alpha, f.coef.view());
  add_grad_first(O, t.sum.view(), w.gamma, f.coef.view());
  f.constant = w.beta * three_way_product(O, m.rel_ot(r), t.sum.view());
  return f;
}

// Time slot free: ST, OT and SOT terms carry t; SO is constant.
template <class Real>
LinearForm time_form(const BasicModel<Real>& m, long long s, long long r, long long o) {
  detail::check_ids(m, s, r, o);
  const auto& w = m.weights();
  const auto S = m.entity(s), O = m.entity(o);
  LinearForm f{ComplexVec(m.dim()), 0.0};
  add_grad_third(S, m.rel_st(r), w.alpha, f.coef.view());
  add_grad_third(O, m.rel_ot(r), w.beta, f.coef.view());
  add_grad_third(S, O, w.gamma, f.coef.view());
  f.constant = three_way_product(S, m.rel_so(r), O);
  return f;
}

template <class Real>
std::vector<double> score_all_entities(const BasicModel<Real>& m, const LinearForm& f) {
  std::vector<double> out(m.shape().num_entities);
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = f.eval(m.entity(e));
  return out;
}

// Base score of (s, r, e, t) for every entity e.
template <class Real>
std::vector<double> score_all_objects(const BasicModel<Real>& m, long long s, long long r, const TimeArg& t) {
  return score_all_entities(m, object_form(m, s, r, t));
}

template <class Real>
std::vector<double> score_all_objects(const BasicModel<Real>& m, long long s, long long r, Instant t) {
  return score_all_objects(m, s, r, make_time_arg(m, t));
}

template <class Real>
std::vector<double> score_all_objects(const BasicModel<Real>& m, long long s, long long r, const TimeInterval& T) {
  return score_all_objects(m, s, r, make_time_arg(m, T));
}

// Base score of (e, r, o, t) for every entity e.
template <class Real>
std::vector<double> score_all_subjects(const BasicModel<Real>& m, long long r, long long o, const TimeArg& t) {
  return score_all_entities(m, subject_form(m, r, o, t));
}

// Base score of (s, r, o, t) for every instant t.
template <class Real>
std::vector<double> score_all_times(const BasicModel<Real>& m, long long s, long long r, long long o) {
  const LinearForm f = time_form(m, s, r, o);
  std::vector<double> out(m.shape().num_instants);
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = f.eval(m.time(t));
  return out;
}

}  // namespace tkbc
