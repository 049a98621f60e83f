#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "tkbc/error.hpp"

namespace tkbc {

// View of one complex vector stored as separate real and imaginary arrays.
template <class T>
struct ComplexRow {
  T* re = nullptr;
  T* im = nullptr;
  std::size_t dim = 0;

  operator ComplexRow<const T>() const { return {re, im, dim}; }
};

// Owned complex vector in double precision (aggregates, sums, virtual candidates).
struct ComplexVec {
  std::vector<double> re, im;

  ComplexVec() = default;
  explicit ComplexVec(std::size_t d) : re(d, 0.0), im(d, 0.0) {}

  std::size_t dim() const { return re.size(); }
  ComplexRow<double> view() { return {re.data(), im.data(), re.size()}; }
  ComplexRow<const double> view() const { return {re.data(), im.data(), re.size()}; }

  template <class T>
  void add(ComplexRow<T> r, double scale = 1.0) {
    for (std::size_t d = 0; d < r.dim; ++d) {
      re[d] += scale * static_cast<double>(r.re[d]);
      im[d] += scale * static_cast<double>(r.im[d]);
    }
  }
};

// Re( sum_d a[d] * b[d] * conj(c)[d] ), accumulated in double.
template <class A, class B, class C>
double three_way_product(ComplexRow<A> a, ComplexRow<B> b, ComplexRow<C> c) {
  if (a.dim != b.dim || b.dim != c.dim) throw RangeError("three_way_product: dimension mismatch");
  double acc = 0.0;
  for (std::size_t d = 0; d < a.dim; ++d) {
    const double ar = a.re[d], ai = a.im[d], br = b.re[d], bi = b.im[d], cr = c.re[d], ci = c.im[d];
    acc += (ar * br - ai * bi) * cr + (ar * bi + ai * br) * ci;
  }
  return acc;
}

// Partial derivatives of three_way_product with respect to each slot, scaled and added to out.
// The product is linear in each slot, so these are also the coefficients of that slot.
template <class B, class C>
void add_grad_first(ComplexRow<B> b, ComplexRow<C> c, double scale, ComplexRow<double> out) {
  for (std::size_t d = 0; d < out.dim; ++d) {
    const double br = b.re[d], bi = b.im[d], cr = c.re[d], ci = c.im[d];
    out.re[d] += scale * (br * cr + bi * ci);
    out.im[d] += scale * (br * ci - bi * cr);
  }
}

template <class A, class C>
void add_grad_second(ComplexRow<A> a, ComplexRow<C> c, double scale, ComplexRow<double> out) {
  for (std::size_t d = 0; d < out.dim; ++d) {
    const double ar = a.re[d], ai = a.im[d], cr = c.re[d], ci = c.im[d];
    out.re[d] += scale * (ar * cr + ai * ci);
    out.im[d] += scale * (ar * ci - ai * cr);
  }
}

template <class A, class B>
void add_grad_third(ComplexRow<A> a, ComplexRow<B> b, double scale, ComplexRow<double> out) {
  for (std::size_t d = 0; d < out.dim; ++d) {
    const double ar = a.re[d], ai = a.im[d], br = b.re[d], bi = b.im[d];
    out.re[d] += scale * (ar * br - ai * bi);
    out.im[d] += scale * (ar * bi + ai * br);
  }
}

// Parameter tables of the model; relations own three vectors each.
enum class Table : std::size_t { entity = 0, rel_so = 1, rel_st = 2, rel_ot = 3, time = 4 };
inline constexpr std::size_t kNumTables = 5;

struct ModelShape {
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // including inverse relations
  std::size_t num_instants = 0;
  std::size_t dim = 0;             // complex dimension

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// Flat layout: every table stores rows*dim real parts followed by rows*dim imaginary parts.
class ParameterLayout {
 public:
  ParameterLayout() = default;
  explicit ParameterLayout(const ModelShape& shape) : shape_(shape) {
    const std::array<std::size_t, kNumTables> rows = {shape.num_entities, shape.num_relations, shape.num_relations,
                                                      shape.num_relations, shape.num_instants};
    std::size_t off = 0;
    for (std::size_t k = 0; k < kNumTables; ++k) {
      rows_[k] = rows[k];
      offset_[k] = off;
      off += 2 * rows[k] * shape.dim;
    }
    size_ = off;
  }

  const ModelShape& shape() const { return shape_; }
  std::size_t size() const { return size_; }
  std::size_t rows(Table t) const { return rows_[static_cast<std::size_t>(t)]; }
  std::size_t offset(Table t) const { return offset_[static_cast<std::size_t>(t)]; }
  std::size_t table_size(Table t) const { return 2 * rows(t) * shape_.dim; }

  template <class T>
  ComplexRow<T> row(T* base, Table t, std::size_t i) const {
    if (i >= rows(t)) throw RangeError("row index out of range");
    const std::size_t k = static_cast<std::size_t>(t);
    T* p = base + offset_[k];
    return {p + i * shape_.dim, p + (rows_[k] + i) * shape_.dim, shape_.dim};
  }

 private:
  ModelShape shape_{};
  std::array<std::size_t, kNumTables> rows_{};
  std::array<std::size_t, kNumTables> offset_{};
  std::size_t size_ = 0;
};

// Fixed weights of the three time-dependent terms in the base score.
struct HyperWeights {
  double alpha = 5.0;
  double beta = 5.0;
  double gamma = 0.0;

  friend bool operator==(const HyperWeights&, const HyperWeights&) = default;
};

// Complex embeddings of entities, relations (SO, ST, OT) and instants.
template <class Real>
class BasicModel {
 public:
  using value_type = Real;

  BasicModel() = default;
  BasicModel(const ModelShape& shape, HyperWeights weights)
      : layout_(shape), values_(layout_.size(), Real(0)), weights_(weights) {
    if (shape.dim == 0) throw RangeError("model dimension must be positive");
  }

  const ModelShape& shape() const { return layout_.shape(); }
  const ParameterLayout& layout() const { return layout_; }
  const HyperWeights& weights() const { return weights_; }
  HyperWeights& weights() { return weights_; }
  std::size_t dim() const { return shape().dim; }

  std::span<Real> parameters() { return values_; }
  std::span<const Real> parameters() const { return values_; }
  std::size_t parameter_count() const { return values_.size(); }

  ComplexRow<Real> row(Table t, std::size_t i) { return layout_.row(values_.data(), t, i); }
  ComplexRow<const Real> row(Table t, std::size_t i) const { return layout_.row(values_.data(), t, i); }

  ComplexRow<const Real> entity(std::size_t e) const { return row(Table::entity, e); }
  ComplexRow<const Real> rel_so(std::size_t r) const { return row(Table::rel_so, r); }
  ComplexRow<const Real> rel_st(std::size_t r) const { return row(Table::rel_st, r); }
  ComplexRow<const Real> rel_ot(std::size_t r) const { return row(Table::rel_ot, r); }
  ComplexRow<const Real> time(std::size_t t) const { return row(Table::time, t); }

  // i.i.d. zero-mean Gaussian components.
  template <class Rng>
  void randomize(Rng& rng, double stddev = 0.05) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : values_) v = static_cast<Real>(dist(rng));
  }

  template <class Other>
  BasicModel<Other> cast() const {
    BasicModel<Other> out(shape(), weights_);
    auto dst = out.parameters();
    for (std::size_t i = 0; i < values_.size(); ++i) dst[i] = static_cast<Other>(values_[i]);
    return out;
  }

 private:
  ParameterLayout layout_;
  std::vector<Real> values_;
  HyperWeights weights_;
};

using Model = BasicModel<float>;

// Dense gradient aligned with a model's parameter layout.
class Gradient {
 public:
  Gradient() = default;
  explicit Gradient(const ParameterLayout& layout) : layout_(layout), values_(layout.size(), 0.0) {}

  ComplexRow<double> row(Table t, std::size_t i) { return layout_.row(values_.data(), t, i); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const ParameterLayout& layout() const { return layout_; }
  void clear() { std::fill(values_.begin(), values_.end(), 0.0); }

 private:
  ParameterLayout layout_;
  std::vector<double> values_;
};

// Expected parameter count 2d(|E| + |T| + 3|R|) with |R| including inverses,
// i.e. 2d(|E| + |T| + 6|R_base|) for an inverse-augmented model.
inline std::size_t expected_parameter_count(std::size_t entities, std::size_t instants, std::size_t base_relations,
                                            std::size_t dim, bool with_inverses = true) {
  const std::size_t rel_vectors = 3 * base_relations * (with_inverses ? 2 : 1);
  return 2 * dim * (entities + instants + rel_vectors);
}

}  // namespace tkbc
