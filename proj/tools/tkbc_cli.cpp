// Command-line front end: train, evaluate, tune, mine and diagnose temporal KB models.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tkbc/tkbc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tkbc;

namespace {

TemporalKB load_kb(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("dataset directory not found: " + dir.string());
  return parse_dataset(load_dataset_config(dir));
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(file.string() + ": " + e.what());
  }
}

void write_json(const fs::path& file, const json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

Fold fold_from_string(const std::string& s) {
  if (s == "train") return Fold::train;
  if (s == "dev" || s == "valid") return Fold::dev;
  if (s == "test") return Fold::test;
  throw UsageError("unknown split '" + s + "' (expected train|dev|test)");
}

void check_bundle(const ModelBundle& b, const TemporalKB& kb) {
  const auto& sh = b.model.shape();
  if (sh.num_entities != kb.num_entities() || sh.num_relations != kb.num_relations() ||
      sh.num_instants != kb.num_instants() || b.base_relations != kb.vocab().num_base_relations()) {
    throw Error("model does not match dataset (entity, relation or instant counts differ)");
  }
}

// Loaded model plus the gadget index it needs for scoring.
struct Loaded {
  TemporalKB kb;
  ModelBundle bundle;
  GadgetIndex index;

  Scorer scorer(bool base_only) const {
    Scorer sc{&bundle.model};
    if (!base_only && bundle.gadgets) {
      sc.index = &index;
      sc.gadgets = &*bundle.gadgets;
      sc.kappa = bundle.kappa;
      sc.lambda = bundle.lambda;
    }
    return sc;
  }
};

Loaded load_all(const fs::path& data, const fs::path& model) {
  Loaded l{load_kb(data), {}, {}};
  if (!fs::exists(model / "manifest.json")) throw UsageError("no model bundle at " + model.string());
  l.bundle = load_model(model);
  check_bundle(l.bundle, l.kb);
  l.index = GadgetIndex(l.kb);
  return l;
}

struct TrainArgs {
  std::string data, config, out, from, log;
  int phase = 1;
  bool gadgets = false;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  TrainingConfig cfg;
  if (!a.config.empty()) cfg = training_config_from_json(read_json(a.config));
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  const TemporalKB kb = load_kb(a.data);
  if (!kb.has_inverses()) throw UsageError("training needs inverse facts (dataset.json has add_inverse=false)");

  const fs::path out = a.out.empty() ? fs::path(a.from) : fs::path(a.out);
  if (out.empty()) throw UsageError("--out is required");
  fs::create_directories(out);
  const fs::path log_path = a.log.empty() ? out / "train_log.jsonl" : fs::path(a.log);
  std::ofstream log(log_path, a.phase == 2 ? std::ios::app : std::ios::trunc);
  auto on_epoch = [&](const EpochRecord& r) {
    log << to_json(r).dump() << '\n';
    log.flush();
    std::fprintf(stderr, "phase %zu epoch %zu loss %.6f%s\n", r.phase, r.epoch, r.loss,
                 r.dev_mrr ? (" dev_mrr " + std::to_string(*r.dev_mrr)).c_str() : "");
  };

  ModelBundle bundle;
  if (a.phase == 2) {
    if (a.from.empty()) throw UsageError("--phase 2 needs --from <phase-1 model dir>");
    if (!fs::exists(fs::path(a.from) / "manifest.json")) {
      throw UsageError("no phase-1 model bundle at " + a.from);
    }
    bundle = load_model(a.from);
    check_bundle(bundle, kb);
  } else if (a.phase == 1) {
    auto res = train_phase1(kb, cfg, on_epoch);
    bundle.model = std::move(res.model);
    bundle.base_relations = kb.vocab().num_base_relations();
    bundle.granularity = kb.vocab().granularity;
    bundle.label_origin = kb.vocab().label_origin;
    bundle.thresholds = ThresholdTable(bundle.base_relations);
  } else {
    throw UsageError("--phase must be 1 or 2");
  }
  bundle.config = to_json(cfg);

  if (a.phase == 2 || a.gadgets) {
    const GadgetIndex index(kb);
    auto g = fit_gadgets<float>(index, cfg.k_rec, cfg.sigma_floor);
    auto res = train_phase2(kb, bundle.model, index, std::move(g), cfg, on_epoch);
    bundle.gadgets = std::move(res.gadgets);
    bundle.kappa = cfg.kappa;
    bundle.lambda = cfg.lambda;
  }
  save_model(bundle, out);
  std::cout << "saved model to " << out.string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string data, model, split = "test", json_out, per_query;
  std::string filter = "time-aware";
  std::vector<std::string> metrics;
  bool base_only = false;
  bool tune = false;
};

int cmd_eval_link(const EvalArgs& a) {
  const FilterMethod method = filter_method_from_string(a.filter);
  const auto l = load_all(a.data, a.model);
  const Fold fold = fold_from_string(a.split);
  if (l.kb.fold(fold).empty()) throw Error("the " + a.split + " fold is empty");
  const FilterIndex filter(l.kb);
  // Per-query dumps carry every method.
  const bool all = !a.per_query.empty();
  LinkEvalOptions opts{all || method == FilterMethod::time_aware, all || method == FilterMethod::exact};
  const auto reports = evaluate_link(l.scorer(a.base_only), l.kb, fold, filter, opts);
  const auto m = summarize_link(reports, method);
  std::cout << std::left << std::setw(10) << "filter" << to_string(method) << '\n'
            << std::setw(10) << "queries" << m.count << '\n'
            << std::setw(10) << "MRR" << std::fixed << std::setprecision(4) << m.mrr << '\n'
            << std::setw(10) << "HITS@1" << m.hits1 << '\n'
            << std::setw(10) << "HITS@10" << m.hits10 << '\n';
  if (!a.json_out.empty()) {
    json j = to_json(m);
    j["filter"] = to_string(method);
    j["split"] = a.split;
    write_json(a.json_out, j);
  }
  if (!a.per_query.empty()) {
    std::ofstream out(a.per_query);
    for (const auto& r : reports) out << to_json(r, l.kb.vocab()).dump() << '\n';
  }
  return 0;
}

int cmd_eval_time(const EvalArgs& a) {
  std::vector<IntervalMetric> metrics;
  for (const auto& s : a.metrics) metrics.push_back(interval_metric_from_string(s));
  if (metrics.empty()) metrics.assign(std::begin(kAllIntervalMetrics), std::end(kAllIntervalMetrics));
  auto l = load_all(a.data, a.model);
  const Fold fold = fold_from_string(a.split);
  const Scorer sc = l.scorer(a.base_only);
  ThresholdTable table = l.bundle.thresholds;
  if (a.tune) table = tune_thresholds(sc, l.kb, IntervalMetric::aeiou, Fold::dev);
  const auto reports = evaluate_time(sc, l.kb, fold, table);
  if (reports.empty()) throw Error("no " + a.split + " facts with bounded intervals");
  const auto s = summarize_time(reports);
  std::cout << std::left << std::setw(12) << "queries" << s.count << '\n' << std::fixed << std::setprecision(4);
  json j = {{"split", a.split}, {"queries", s.count}};
  for (auto m : metrics) {
    std::cout << std::setw(12) << to_string(m) << s.value(m) << '\n';
    j[to_string(m)] = s.value(m);
  }
  if (!a.json_out.empty()) write_json(a.json_out, j);
  if (!a.per_query.empty()) {
    std::ofstream out(a.per_query);
    for (const auto& r : reports) out << to_json(r, l.kb.vocab()).dump() << '\n';
  }
  return 0;
}

int cmd_tune(const EvalArgs& a, const std::string& metric) {
  auto l = load_all(a.data, a.model);
  const auto m = interval_metric_from_string(metric);
  l.bundle.thresholds = tune_thresholds(l.scorer(a.base_only), l.kb, m, Fold::dev);
  save_model(l.bundle, a.model);
  const auto& v = l.kb.vocab();
  for (std::size_t r = 0; r < l.bundle.thresholds.theta.size(); ++r) {
    std::cout << std::left << std::setw(32) << v.relation_name(static_cast<RelationId>(r))
              << l.bundle.thresholds.theta[r] << '\n';
  }
  return 0;
}

struct MineArgs {
  std::string data, out;
  double confidence = 0.99;
  std::size_t min_support = 100;
};

int cmd_mine(const MineArgs& a) {
  const auto kb = load_kb(a.data);
  const auto cs = mine_ordering_constraints(kb, a.confidence, a.min_support);
  const json j = constraints_to_json(cs, kb.vocab());
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(a.out, j);
    std::cout << cs.size() << " constraints written to " << a.out << '\n';
  }
  return 0;
}

struct DiagnoseArgs {
  std::string data, model, constraints, curve, split = "test";
  double confidence = 0.99;
  std::size_t min_support = 100;
  std::size_t curve_support = 30;
  long long max_gap = 0;
  bool base_only = false;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const auto l = load_all(a.data, a.model);
  const auto cs = a.constraints.empty() ? mine_ordering_constraints(l.kb, a.confidence, a.min_support)
                                        : constraints_from_json(read_json(a.constraints), l.kb.vocab());
  const auto rep = ordering_violation_rate(l.scorer(a.base_only), l.kb, cs, fold_from_string(a.split));
  std::cout << std::left << std::setw(14) << "constraints" << cs.size() << '\n'
            << std::setw(14) << "queries" << rep.queries << '\n'
            << std::setw(14) << "violations" << rep.violations << '\n'
            << std::setw(14) << "rate" << std::fixed << std::setprecision(4) << rep.rate() << '\n';
  if (!a.curve.empty()) {
    const auto pts = embedding_distance_curve(l.bundle.model,
                                              a.max_gap > 0 ? std::optional<Instant>(a.max_gap) : std::nullopt,
                                              a.curve_support);
    std::ofstream out(a.curve);
    if (!out) throw Error("cannot write " + a.curve);
    out << "gap,mean_l2,support\n" << std::setprecision(9);
    for (const auto& p : pts) out << p.gap << ',' << p.mean_l2 << ',' << p.support << '\n';
  }
  return 0;
}

int cmd_export(const EvalArgs& a) {
  const auto l = load_all(a.data, a.model);
  const Fold fold = fold_from_string(a.split);
  if (l.kb.fold(fold).empty()) throw Error("the " + a.split + " fold is empty");
  const Scorer sc = l.scorer(a.base_only);
  const FilterIndex filter(l.kb);
  const auto ranks = evaluate_link(sc, l.kb, fold, filter);
  json link;
  for (auto m : {FilterMethod::unfiltered, FilterMethod::time_insensitive, FilterMethod::time_aware,
                 FilterMethod::exact}) {
    link[to_string(m)] = to_json(summarize_link(ranks, m));
  }
  json report = {{"split", a.split}, {"link_prediction", link}};
  const auto times = evaluate_time(sc, l.kb, fold, l.bundle.thresholds);
  if (!times.empty()) {
    const auto s = summarize_time(times);
    json t = {{"queries", s.count}};
    for (auto m : kAllIntervalMetrics) t[to_string(m)] = s.value(m);
    report["time_prediction"] = t;
  }
  if (a.json_out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    write_json(a.json_out, report);
    std::cout << "report written to " << a.json_out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal knowledge-base completion: training, link and time prediction, diagnostics"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train embeddings (phase 1) and optionally gadgets (phase 2)");
  t->add_option("--data", train.data, "Dataset directory")->required();
  t->add_option("--config", train.config, "Training config JSON");
  t->add_option("--out", train.out, "Output model directory");
  t->add_option("--from", train.from, "Phase-1 model directory (phase 2)");
  t->add_option("--phase", train.phase, "1 = embeddings (default), 2 = gadgets on a saved model");
  t->add_flag("--gadgets", train.gadgets, "Run phase 2 after phase 1");
  t->add_option("--seed", train.seed, "Override the config seed");
  t->add_option("--log", train.log, "JSON-lines training log (default <out>/train_log.jsonl)");

  EvalArgs link;
  auto* el = app.add_subcommand("eval-link", "Link prediction MRR / HITS@k");
  el->add_option("--data", link.data, "Dataset directory")->required();
  el->add_option("--model", link.model, "Model directory")->required();
  el->add_option("--filter", link.filter, "unfiltered|time-insensitive|time-aware|exact");
  el->add_option("--split", link.split, "dev|test");
  el->add_flag("--base-only", link.base_only, "Ignore gadget features");
  el->add_option("--json", link.json_out, "Write the summary as JSON");
  el->add_option("--per-query", link.per_query, "Write per-query ranks as JSON lines");

  EvalArgs tim;
  auto* et = app.add_subcommand("eval-time", "Time-interval prediction metrics");
  et->add_option("--data", tim.data, "Dataset directory")->required();
  et->add_option("--model", tim.model, "Model directory")->required();
  et->add_option("--split", tim.split, "dev|test");
  et->add_option("--metric", tim.metrics, "iou|giou|giou_prime|aeiou|tac (repeatable)");
  et->add_flag("--tune", tim.tune, "Tune thresholds on dev before predicting");
  et->add_flag("--base-only", tim.base_only, "Ignore gadget features");
  et->add_option("--json", tim.json_out, "Write the summary as JSON");
  et->add_option("--per-query", tim.per_query, "Write per-query interval reports as JSON lines");

  EvalArgs tune;
  std::string tune_metric = "aeiou";
  auto* tt = app.add_subcommand("tune-thresholds", "Tune per-relation coalescing thresholds on dev");
  tt->add_option("--data", tune.data, "Dataset directory")->required();
  tt->add_option("--model", tune.model, "Model directory (updated in place)")->required();
  tt->add_option("--metric", tune_metric, "Metric to maximise");
  tt->add_flag("--base-only", tune.base_only, "Ignore gadget features");

  MineArgs mine;
  auto* mc = app.add_subcommand("mine-constraints", "Mine relation ordering constraints");
  mc->add_option("--data", mine.data, "Dataset directory")->required();
  mc->add_option("--out", mine.out, "Output JSON (stdout if omitted)");
  mc->add_option("--confidence", mine.confidence, "Minimum confidence");
  mc->add_option("--min-support", mine.min_support, "Minimum supporting entities");

  DiagnoseArgs diag;
  auto* dg = app.add_subcommand("diagnose", "Ordering-violation rate and time-embedding distance curve");
  dg->add_option("--data", diag.data, "Dataset directory")->required();
  dg->add_option("--model", diag.model, "Model directory")->required();
  dg->add_option("--constraints", diag.constraints, "Constraint JSON (mined from train if omitted)");
  dg->add_option("--confidence", diag.confidence, "Mining confidence when mining");
  dg->add_option("--min-support", diag.min_support, "Mining support when mining");
  dg->add_option("--split", diag.split, "dev|test");
  dg->add_option("--curve", diag.curve, "Write gap,mean_l2,support CSV");
  dg->add_option("--curve-support", diag.curve_support, "Minimum instant pairs per gap");
  dg->add_option("--max-gap", diag.max_gap, "Largest gap in the curve");
  dg->add_flag("--base-only", diag.base_only, "Ignore gadget features");

  EvalArgs rep;
  auto* er = app.add_subcommand("export-report", "Link and time metrics in one JSON report");
  er->add_option("--data", rep.data, "Dataset directory")->required();
  er->add_option("--model", rep.model, "Model directory")->required();
  er->add_option("--split", rep.split, "dev|test");
  er->add_option("--out", rep.json_out, "Output JSON (stdout if omitted)");
  er->add_flag("--base-only", rep.base_only, "Ignore gadget features");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*t) return cmd_train(train);
    if (*el) return cmd_eval_link(link);
    if (*et) return cmd_eval_time(tim);
    if (*tt) return cmd_tune(tune, tune_metric);
    if (*mc) return cmd_mine(mine);
    if (*dg) return cmd_diagnose(diag);
    if (*er) return cmd_export(rep);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::data);
  }
  return static_cast<int>(ExitCode::usage);
}
