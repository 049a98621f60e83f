#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tkbc/error.hpp"
#include "tkbc/evaluation.hpp"
#include "tkbc/gadgets.hpp"
#include "tkbc/inference.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/model.hpp"
#include "tkbc/scoring.hpp"

namespace tkbc {

struct TrainingConfig {
  std::size_t dim = 200;
  double init_std = 0.05;
  double learning_rate = 0.1;
  double reg_weight = 0.03;
  std::size_t batch_size = 1500;
  double smoothing_weight = 0.0;
  std::size_t epochs = 500;
  std::size_t patience = 10;
  std::size_t validate_every = 5;
  double alpha = 5.0;
  double beta = 5.0;
  double gamma = 0.0;
  double kappa = 3.0;
  double lambda = 5.0;
  std::size_t k_rec = 1;
  double sigma_floor = 1.0;
  std::size_t phase2_epochs = 10;
  std::size_t phase2_negatives = 100;
  double phase2_reg = 0.002;
  double phase2_learning_rate = 0.1;
  std::uint64_t seed = 0;

  HyperWeights weights() const { return {alpha, beta, gamma}; }

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError(std::string(name) + " must be a non-negative number");
    };
    nonneg(init_std, "init_std");
    nonneg(learning_rate, "learning_rate");
    nonneg(reg_weight, "reg_weight");
    nonneg(smoothing_weight, "smoothing_weight");
    nonneg(alpha, "alpha");
    nonneg(beta, "beta");
    nonneg(gamma, "gamma");
    nonneg(kappa, "kappa");
    nonneg(lambda, "lambda");
    nonneg(phase2_reg, "phase2_reg");
    nonneg(phase2_learning_rate, "phase2_learning_rate");
    if (dim == 0) throw UsageError("dim must be positive");
    if (batch_size == 0) throw UsageError("batch_size must be positive");
    if (validate_every == 0) throw UsageError("validate_every must be positive");
    if (phase2_negatives == 0) throw UsageError("phase2_negatives must be positive");
    if (!(sigma_floor > 0.0)) throw UsageError("sigma_floor must be positive");
  }
};

inline nlohmann::json to_json(const TrainingConfig& c) {
  return {{"dim", c.dim},
          {"init_std", c.init_std},
          {"learning_rate", c.learning_rate},
          {"reg_weight", c.reg_weight},
          {"batch_size", c.batch_size},
          {"smoothing_weight", c.smoothing_weight},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"validate_every", c.validate_every},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"gamma", c.gamma},
          {"kappa", c.kappa},
          {"lambda", c.lambda},
          {"k_rec", c.k_rec},
          {"sigma_floor", c.sigma_floor},
          {"phase2_epochs", c.phase2_epochs},
          {"phase2_negatives", c.phase2_negatives},
          {"phase2_reg", c.phase2_reg},
          {"phase2_learning_rate", c.phase2_learning_rate},
          {"seed", c.seed}};
}

// Unknown keys are rejected so typos do not silently fall back to defaults.
inline TrainingConfig training_config_from_json(const nlohmann::json& j, TrainingConfig c = {}) {
  if (!j.is_object()) throw UsageError("training config must be a JSON object");
  const nlohmann::json known = to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw UsageError("unknown training config key '" + it.key() + "'");
  }
  try {
    auto get = [&](const char* k, auto& field) {
      if (j.contains(k)) field = j.at(k).get<std::decay_t<decltype(field)>>();
    };
    get("dim", c.dim);
    get("init_std", c.init_std);
    get("learning_rate", c.learning_rate);
    get("reg_weight", c.reg_weight);
    get("batch_size", c.batch_size);
    get("smoothing_weight", c.smoothing_weight);
    get("epochs", c.epochs);
    get("patience", c.patience);
    get("validate_every", c.validate_every);
    get("alpha", c.alpha);
    get("beta", c.beta);
    get("gamma", c.gamma);
    get("kappa", c.kappa);
    get("lambda", c.lambda);
    get("k_rec", c.k_rec);
    get("sigma_floor", c.sigma_floor);
    get("phase2_epochs", c.phase2_epochs);
    get("phase2_negatives", c.phase2_negatives);
    get("phase2_reg", c.phase2_reg);
    get("phase2_learning_rate", c.phase2_learning_rate);
    get("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace detail {

// Softmax of scores; returns -log p[gold] and overwrites scores with p - onehot(gold).
inline double softmax_nll_residual(std::vector<double>& scores, std::size_t gold) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  const double log_z = mx + std::log(z);
  const double nll = log_z - scores[gold];
  for (double& s : scores) s = std::exp(s - log_z);
  scores[gold] -= 1.0;
  return nll;
}

template <class Real>
ComplexVec weighted_rows(const BasicModel<Real>& m, Table table, std::span<const double> w) {
  ComplexVec acc(m.dim());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) acc.add(m.row(table, i), w[i]);
  }
  return acc;
}

}  // namespace detail

// Negative log-likelihood of a batch under the three 1vsAll softmaxes (object, subject,
// instant). When grad is non-null the gradient is added to it.
template <class Real>
double loss_instant_batch(const BasicModel<Real>& m, std::span<const InstantFact> batch, Gradient* grad = nullptr) {
  const auto& w = m.weights();
  const std::size_t ne = m.shape().num_entities;
  double loss = 0.0;
  for (const auto& ex : batch) {
    detail::check_ids(m, ex.subject, ex.relation, ex.object);
    detail::check_instant(m, ex.time);
    const auto s = static_cast<std::size_t>(ex.subject), r = static_cast<std::size_t>(ex.relation),
               o = static_cast<std::size_t>(ex.object), t = static_cast<std::size_t>(ex.time);
    const TimeArg targ = make_time_arg(m, ex.time);
    const auto S = m.entity(s), O = m.entity(o), T = m.time(t);
    const auto Rso = m.rel_so(r), Rst = m.rel_st(r), Rot = m.rel_ot(r);

    // Pr(o | s, r, t)
    {
      const LinearForm f = object_form(m, ex.subject, ex.relation, targ);
      auto res = score_all_entities(m, f);
      loss += detail::softmax_nll_residual(res, o);
      if (grad) {
        for (std::size_t e = 0; e < ne; ++e) {
          auto g = grad->row(Table::entity, e);
          for (std::size_t d = 0; d < m.dim(); ++d) {
            g.re[d] += res[e] * f.coef.re[d];
            g.im[d] += res[e] * f.coef.im[d];
          }
        }
        const ComplexVec A = detail::weighted_rows(m, Table::entity, res);
        const auto a = A.view();
        add_grad_first(Rso, a, 1.0, grad->row(Table::entity, s));
        add_grad_second(S, a, 1.0, grad->row(Table::rel_so, r));
        add_grad_second(a, T, w.beta, grad->row(Table::rel_ot, r));
        add_grad_third(a, Rot, w.beta, grad->row(Table::time, t));
        add_grad_first(a, T, w.gamma, grad->row(Table::entity, s));
        add_grad_third(S, a, w.gamma, grad->row(Table::time, t));
      }
    }
    // Pr(s | r, o, t)
    {
      const LinearForm f = subject_form(m, ex.relation, ex.object, targ);
      auto res = score_all_entities(m, f);
      loss += detail::softmax_nll_residual(res, s);
      if (grad) {
        for (std::size_t e = 0; e < ne; ++e) {
          auto g = grad->row(Table::entity, e);
          for (std::size_t d = 0; d < m.dim(); ++d) {
            g.re[d] += res[e] * f.coef.re[d];
            g.im[d] += res[e] * f.coef.im[d];
          }
        }
        const ComplexVec A = detail::weighted_rows(m, Table::entity, res);
        const auto a = A.view();
        add_grad_second(a, O, 1.0, grad->row(Table::rel_so, r));
        add_grad_third(a, Rso, 1.0, grad->row(Table::entity, o));
        add_grad_second(a, T, w.alpha, grad->row(Table::rel_st, r));
        add_grad_third(a, Rst, w.alpha, grad->row(Table::time, t));
        add_grad_second(a, T, w.gamma, grad->row(Table::entity, o));
        add_grad_third(a, O, w.gamma, grad->row(Table::time, t));
      }
    }
    // Pr(t | s, r, o)
    {
      const LinearForm f = time_form(m, ex.subject, ex.relation, ex.object);
      std::vector<double> res(m.shape().num_instants);
      for (std::size_t k = 0; k < res.size(); ++k) res[k] = f.eval(m.time(k));
      loss += detail::softmax_nll_residual(res, t);
      if (grad) {
        for (std::size_t k = 0; k < res.size(); ++k) {
          auto g = grad->row(Table::time, k);
          for (std::size_t d = 0; d < m.dim(); ++d) {
            g.re[d] += res[k] * f.coef.re[d];
            g.im[d] += res[k] * f.coef.im[d];
          }
        }
        const ComplexVec A = detail::weighted_rows(m, Table::time, res);
        const auto a = A.view();
        add_grad_first(Rst, a, w.alpha, grad->row(Table::entity, s));
        add_grad_second(S, a, w.alpha, grad->row(Table::rel_st, r));
        add_grad_first(Rot, a, w.beta, grad->row(Table::entity, o));
        add_grad_second(O, a, w.beta, grad->row(Table::rel_ot, r));
        add_grad_first(O, a, w.gamma, grad->row(Table::entity, s));
        add_grad_second(S, a, w.gamma, grad->row(Table::entity, o));
      }
    }
  }
  return loss;
}

namespace detail {

struct RowRef {
  Table table;
  std::size_t index;
  friend bool operator==(const RowRef&, const RowRef&) = default;
};

struct RowRefHash {
  std::size_t operator()(const RowRef& r) const {
    return std::hash<std::size_t>()(r.index * kNumTables + static_cast<std::size_t>(r.table));
  }
};

}  // namespace detail

// Embeddings named by the batch examples: subject, object, the relation's three vectors and the
// instant. Each distinct row counts once.
inline std::vector<detail::RowRef> touched_rows(std::span<const InstantFact> batch) {
  std::unordered_set<detail::RowRef, detail::RowRefHash> seen;
  std::vector<detail::RowRef> out;
  auto add = [&](Table t, long long i) {
    detail::RowRef ref{t, static_cast<std::size_t>(i)};
    if (seen.insert(ref).second) out.push_back(ref);
  };
  for (const auto& ex : batch) {
    add(Table::entity, ex.subject);
    add(Table::entity, ex.object);
    add(Table::rel_so, ex.relation);
    add(Table::rel_st, ex.relation);
    add(Table::rel_ot, ex.relation);
    add(Table::time, ex.time);
  }
  return out;
}

// reg * sum of squared norms over the distinct rows touched by the batch.
template <class Real>
double l2_batch_regularizer(const BasicModel<Real>& m, std::span<const InstantFact> batch, double reg,
                            Gradient* grad = nullptr) {
  double penalty = 0.0;
  for (const auto& ref : touched_rows(batch)) {
    const auto v = m.row(ref.table, ref.index);
    double sq = 0.0;
    for (std::size_t d = 0; d < v.dim; ++d) {
      sq += static_cast<double>(v.re[d]) * v.re[d] + static_cast<double>(v.im[d]) * v.im[d];
    }
    penalty += reg * sq;
    if (grad) {
      auto g = grad->row(ref.table, ref.index);
      for (std::size_t d = 0; d < v.dim; ++d) {
        g.re[d] += 2.0 * reg * v.re[d];
        g.im[d] += 2.0 * reg * v.im[d];
      }
    }
  }
  return penalty;
}

// weight * sum_t ||time[t+1] - time[t]||^2.
template <class Real>
double temporal_smoothing_penalty(const BasicModel<Real>& m, double weight, Gradient* grad = nullptr) {
  if (weight == 0.0) return 0.0;
  double penalty = 0.0;
  const std::size_t nt = m.shape().num_instants;
  for (std::size_t t = 0; t + 1 < nt; ++t) {
    const auto a = m.time(t), b = m.time(t + 1);
    for (std::size_t d = 0; d < m.dim(); ++d) {
      const double dr = static_cast<double>(b.re[d]) - a.re[d];
      const double di = static_cast<double>(b.im[d]) - a.im[d];
      penalty += weight * (dr * dr + di * di);
      if (grad) {
        auto ga = grad->row(Table::time, t), gb = grad->row(Table::time, t + 1);
        gb.re[d] += 2.0 * weight * dr;
        gb.im[d] += 2.0 * weight * di;
        ga.re[d] -= 2.0 * weight * dr;
        ga.im[d] -= 2.0 * weight * di;
      }
    }
  }
  return penalty;
}

inline constexpr double kAdaGradEpsilon = 1e-8;

// Per-parameter sums of squared gradients.
struct AdaGradState {
  std::vector<double> accumulator;

  AdaGradState() = default;
  explicit AdaGradState(std::size_t n) : accumulator(n, 0.0) {}
};

template <class Real>
void adagrad_step(AdaGradState& state, std::span<Real> params, std::span<const double> grad, double lr,
                  double eps = kAdaGradEpsilon) {
  if (params.size() != grad.size() || state.accumulator.size() != params.size()) {
    throw Error("adagrad_step: gradient, state and parameters are not aligned");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (g == 0.0) continue;
    double& acc = state.accumulator[i];
    acc += g * g;
    params[i] = static_cast<Real>(static_cast<double>(params[i]) - lr * g / (std::sqrt(acc) + eps));
  }
}

struct EpochRecord {
  std::size_t phase = 1;
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> dev_mrr;
  double seconds = 0.0;
};

inline nlohmann::json to_json(const EpochRecord& r) {
  nlohmann::json j = {{"phase", r.phase}, {"epoch", r.epoch}, {"loss", r.loss}, {"seconds", r.seconds}};
  j["dev_mrr"] = r.dev_mrr ? nlohmann::json(*r.dev_mrr) : nlohmann::json(nullptr);
  return j;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

struct Phase1Result {
  Model model;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  std::optional<double> best_dev_mrr;
};

// One instant per train fact, sampled uniformly from its clipped interval.
template <class Rng>
std::vector<InstantFact> sample_epoch(const TemporalKB& kb, std::span<const std::size_t> order, Rng& rng) {
  std::vector<InstantFact> out;
  out.reserve(order.size());
  for (std::size_t i : order) {
    const Fact& f = kb.train()[i];
    out.push_back({f.subject, f.relation, f.object, sample_instant(f, kb.domain(), rng)});
  }
  return out;
}

// Embedding training. Validates on dev every validate_every epochs with time-insensitive MRR
// and keeps the best model; stops after `patience` validations without improvement.
inline Phase1Result train_phase1(const TemporalKB& kb, const TrainingConfig& config, EpochCallback on_epoch = {}) {
  config.validate();
  if (!kb.has_inverses()) throw Error("train_phase1: knowledge base must include inverse facts");
  if (kb.num_instants() == 0) throw Error("train_phase1: empty instant domain");
  std::mt19937_64 rng(config.seed);
  const ModelShape shape{kb.num_entities(), kb.num_relations(), kb.num_instants(), config.dim};
  Phase1Result result;
  result.model = Model(shape, config.weights());
  result.model.randomize(rng, config.init_std);
  Model& model = result.model;
  Model best = model;

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < kb.train().size(); ++i) {
    if (clip(kb.train()[i].interval, kb.domain())) usable.push_back(i);
  }
  const FilterIndex filter(kb);
  const bool validate = !kb.dev().empty();
  AdaGradState opt(model.parameter_count());
  Gradient grad(model.layout());
  std::size_t stale = 0;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(usable.begin(), usable.end(), rng);
    const auto examples = sample_epoch(kb, usable, rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < examples.size(); b += config.batch_size) {
      const std::span<const InstantFact> batch(examples.data() + b,
                                               std::min(config.batch_size, examples.size() - b));
      grad.clear();
      double loss = loss_instant_batch(model, batch, &grad);
      loss += l2_batch_regularizer(model, batch, config.reg_weight, &grad);
      loss += temporal_smoothing_penalty(model, config.smoothing_weight, &grad);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss;
      adagrad_step(opt, model.parameters(), grad.values(), config.learning_rate);
    }
    EpochRecord rec{1, epoch, epoch_loss, std::nullopt, 0.0};
    if (validate && epoch % config.validate_every == 0) {
      const double mrr = link_mrr_time_insensitive(model, kb, Fold::dev, filter);
      rec.dev_mrr = mrr;
      if (!result.best_dev_mrr || mrr > *result.best_dev_mrr) {
        result.best_dev_mrr = mrr;
        result.best_epoch = epoch;
        best = model;
        stale = 0;
      } else {
        ++stale;
      }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (validate && stale >= config.patience && config.patience > 0) break;
  }
  if (result.best_dev_mrr) {
    model = best;
  } else {
    result.best_epoch = result.log.empty() ? 0 : result.log.back().epoch;
  }
  return result;
}

struct Phase2Result {
  GadgetParams gadgets;
  std::vector<EpochRecord> log;
};

namespace detail {

// One phase-2 example: gold fact reduced to its begin instant.
struct Phase2Example {
  EntityId subject;
  RelationId relation;
  EntityId object;
  Instant time;
};

}  // namespace detail

// Log-likelihood of one example against sampled negatives under the full score, adding the
// gadget gradient (scaled by grad_scale) into grad. Embeddings are read only.
template <class Real, class GReal, class Rng>
double phase2_example_loss(const BasicModel<Real>& m, const GadgetIndex& index, const BasicGadgetParams<GReal>& p,
                           EntityId s, RelationId r, EntityId o, Instant t, double kappa, double lambda,
                           std::size_t negatives, Rng& rng, std::vector<double>* grad) {
  const std::size_t ne = m.shape().num_entities;
  const std::size_t nt = m.shape().num_instants;
  double loss = 0.0;
  const TimeInterval at = TimeInterval::at(t);

  if (ne > 1) {
    std::vector<EntityId> cand{o};
    std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(ne) - 2);
    for (std::size_t k = 0; k < negatives; ++k) {
      EntityId e = pick(rng);
      cand.push_back(e >= o ? e + 1 : e);
    }
    const TimeArg targ = make_time_arg(m, t);
    const LinearForm f = object_form(m, s, r, targ);
    std::vector<double> sc(cand.size());
    for (std::size_t c = 0; c < cand.size(); ++c) {
      sc[c] = f.eval(m.entity(static_cast<std::size_t>(cand[c]))) +
              score_gadgets(index, p, s, r, cand[c], at, kappa, lambda,
                            c == 0 ? std::optional<Instant>(t) : std::nullopt);
    }
    loss += detail::softmax_nll_residual(sc, 0);
    if (grad) {
      for (std::size_t c = 0; c < cand.size(); ++c) {
        score_gadgets(index, p, s, r, cand[c], at, kappa, lambda, c == 0 ? std::optional<Instant>(t) : std::nullopt,
                      grad, sc[c]);
      }
    }
  }
  if (nt > 1) {
    std::vector<Instant> cand{t};
    std::uniform_int_distribution<Instant> pick(0, static_cast<Instant>(nt) - 2);
    for (std::size_t k = 0; k < negatives; ++k) {
      Instant x = pick(rng);
      cand.push_back(x >= t ? x + 1 : x);
    }
    const LinearForm f = time_form(m, s, r, o);
    std::vector<double> sc(cand.size());
    for (std::size_t c = 0; c < cand.size(); ++c) {
      sc[c] = f.eval(m.time(static_cast<std::size_t>(cand[c]))) +
              score_gadgets(index, p, s, r, o, TimeInterval::at(cand[c]), kappa, lambda, t);
    }
    loss += detail::softmax_nll_residual(sc, 0);
    if (grad) {
      for (std::size_t c = 0; c < cand.size(); ++c) {
        score_gadgets(index, p, s, r, o, TimeInterval::at(cand[c]), kappa, lambda, t, grad, sc[c]);
      }
    }
  }
  return loss;
}

namespace detail {

template <class Real>
std::vector<Real> snapshot(const BasicModel<Real>& m) {
  return {m.parameters().begin(), m.parameters().end()};
}

}  // namespace detail

// Gadget training with embeddings frozen. Examples are train facts (including inverse facts)
// whose begin is known; each is scored against uniformly sampled negative entities and
// negative instants. The fact's own occurrence is left out of its recurrence evidence.
inline Phase2Result train_phase2(const TemporalKB& kb, const Model& model, const GadgetIndex& index,
                                 GadgetParams gadgets, const TrainingConfig& config, EpochCallback on_epoch = {}) {
  config.validate();
  if (model.shape().num_entities != kb.num_entities() || model.shape().num_instants != kb.num_instants() ||
      model.shape().num_relations != kb.num_relations()) {
    throw Error("train_phase2: model does not match the knowledge base");
  }
  if (gadgets.num_relations != index.num_base_relations()) {
    throw Error("train_phase2: gadget parameters do not match the knowledge base");
  }
  const auto frozen = detail::snapshot(model);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<detail::Phase2Example> examples;
  for (const auto& f : kb.train()) {
    const auto c = clip(f.interval, kb.domain());
    if (!c || !f.interval.begin_bounded()) continue;
    examples.push_back({f.subject, f.relation, f.object, c->begin});
  }
  Phase2Result result{std::move(gadgets), {}};
  auto& p = result.gadgets;
  AdaGradState opt(p.trainable.size());
  std::vector<double> grad(p.trainable.size());
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.phase2_epochs; ++epoch) {
    std::shuffle(examples.begin(), examples.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < examples.size(); b += config.batch_size) {
      const std::size_t end = std::min(examples.size(), b + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t i = b; i < end; ++i) {
        const auto& ex = examples[i];
        loss += phase2_example_loss(model, index, p, ex.subject, ex.relation, ex.object, ex.time, config.kappa,
                                    config.lambda, config.phase2_negatives, rng, &grad);
      }
      for (std::size_t k = 0; k < grad.size(); ++k) {
        const double v = p.trainable[k];
        loss += config.phase2_reg * v * v;
        grad[k] += 2.0 * config.phase2_reg * v;
      }
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite phase-2 loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss;
      adagrad_step(opt, std::span<float>(p.trainable), grad, config.phase2_learning_rate);
    }
    EpochRecord rec{2, epoch, epoch_loss, std::nullopt,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  const auto after = model.parameters();
  if (std::memcmp(frozen.data(), after.data(), frozen.size() * sizeof(float)) != 0) {
    throw Error("train_phase2: embeddings changed during gadget training");
  }
  return result;
}

}  // namespace tkbc
