#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tkbc/error.hpp"
#include "tkbc/kb.hpp"

namespace tkbc {

enum class InvertedIntervalPolicy { error, swap, drop };

struct DatasetConfig {
  std::filesystem::path path;
  Granularity granularity = Granularity::year;
  std::string missing_token = "-";
  // Column roles: subject, relation, object, begin, end, or time (begin = end).
  std::vector<std::string> columns = {"subject", "relation", "object", "begin", "end"};
  bool add_inverse = true;
  InvertedIntervalPolicy inverted_intervals = InvertedIntervalPolicy::error;
};

inline const char* fold_file_name(Fold f) {
  switch (f) {
    case Fold::train: return "train.txt";
    case Fold::dev: return "valid.txt";
    case Fold::test: return "test.txt";
  }
  return "";
}

// Reads optional keys from JSON; path is not part of the JSON.
inline DatasetConfig dataset_config_from_json(const nlohmann::json& j, DatasetConfig cfg = {}) {
  try {
    if (j.contains("granularity")) cfg.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    if (j.contains("missing_token")) cfg.missing_token = j.at("missing_token").get<std::string>();
    if (j.contains("columns")) cfg.columns = j.at("columns").get<std::vector<std::string>>();
    if (j.contains("add_inverse")) cfg.add_inverse = j.at("add_inverse").get<bool>();
    if (j.contains("inverted_intervals")) {
      const auto p = j.at("inverted_intervals").get<std::string>();
      if (p == "error") cfg.inverted_intervals = InvertedIntervalPolicy::error;
      else if (p == "swap") cfg.inverted_intervals = InvertedIntervalPolicy::swap;
      else if (p == "drop") cfg.inverted_intervals = InvertedIntervalPolicy::drop;
      else throw ParseError("inverted_intervals must be error|swap|drop");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset config: ") + e.what());
  }
  return cfg;
}

// Loads <dir>/dataset.json when present, defaults otherwise.
inline DatasetConfig load_dataset_config(const std::filesystem::path& dir) {
  DatasetConfig cfg;
  cfg.path = dir;
  const auto file = dir / "dataset.json";
  if (!std::filesystem::exists(file)) return cfg;
  std::ifstream in(file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  return dataset_config_from_json(j, cfg);
}

namespace detail {

struct RawLabel {
  bool missing = true;
  Instant value = 0;
};

inline Instant parse_integer(std::string_view s, std::string_view whole) {
  Instant v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) throw RangeError("time label '" + std::string(whole) + "' out of range");
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("malformed time label '" + std::string(whole) + "'");
  }
  return v;
}

inline RawLabel parse_time_label(std::string_view tok, Granularity g, std::string_view missing) {
  if (tok.empty() || tok == missing) return {};
  const bool negative = tok.front() == '-' && tok.size() > 1;
  const std::string_view body = negative ? tok.substr(1) : tok;
  const auto dash = body.find('-');
  const std::string_view year_part = body.substr(0, dash);
  if (year_part.find('#') != std::string_view::npos) return {};
  Instant year = parse_integer(year_part, tok);
  if (negative) year = -year;
  constexpr Instant kMaxYear = 1'000'000;
  if (year > kMaxYear || year < -kMaxYear) throw RangeError("time label '" + std::string(tok) + "' out of range");
  if (g == Granularity::year) return {false, year};

  if (dash == std::string_view::npos) throw ParseError("day label '" + std::string(tok) + "' needs YYYY-MM-DD");
  const std::string_view rest = body.substr(dash + 1);
  const auto dash2 = rest.find('-');
  if (dash2 == std::string_view::npos) throw ParseError("day label '" + std::string(tok) + "' needs YYYY-MM-DD");
  const std::string_view mpart = rest.substr(0, dash2);
  const std::string_view dpart = rest.substr(dash2 + 1);
  if (mpart.find('#') != std::string_view::npos || dpart.find('#') != std::string_view::npos) return {};
  const auto m = parse_integer(mpart, tok);
  const auto d = parse_integer(dpart, tok);
  if (year < -32767 || year > 32767) throw RangeError("day label '" + std::string(tok) + "' out of range");
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(year)},
                                        std::chrono::month{static_cast<unsigned>(std::clamp<Instant>(m, 0, 255))},
                                        std::chrono::day{static_cast<unsigned>(std::clamp<Instant>(d, 0, 255))}};
  if (!ymd.ok()) throw RangeError("day label '" + std::string(tok) + "' is not a calendar date");
  return {false, std::chrono::sys_days{ymd}.time_since_epoch().count()};
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

struct RawFact {
  std::string subject, relation, object;
  RawLabel begin, end;
};

}  // namespace detail

// Loads train.txt / valid.txt / test.txt from config.path. Instant ids are offsets from the
// earliest bounded label across all folds; missing endpoints become unbounded.
inline TemporalKB parse_dataset(const DatasetConfig& config) {
  using detail::RawFact;
  int col_s = -1, col_r = -1, col_o = -1, col_b = -1, col_e = -1;
  for (std::size_t i = 0; i < config.columns.size(); ++i) {
    const auto& c = config.columns[i];
    const int k = static_cast<int>(i);
    if (c == "subject") col_s = k;
    else if (c == "relation") col_r = k;
    else if (c == "object") col_o = k;
    else if (c == "begin") col_b = k;
    else if (c == "end") col_e = k;
    else if (c == "time") col_b = col_e = k;
    else if (c != "ignore") throw ParseError("unknown column role '" + c + "'");
  }
  if (col_s < 0 || col_r < 0 || col_o < 0 || col_b < 0 || col_e < 0) {
    throw ParseError("column order must name subject, relation, object and begin/end (or time)");
  }
  const std::size_t ncols = config.columns.size();

  std::array<std::vector<RawFact>, 3> raw;
  std::optional<Instant> lo, hi;
  for (Fold fold : {Fold::train, Fold::dev, Fold::test}) {
    const auto file = config.path / fold_file_name(fold);
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto where = file.string() + ":" + std::to_string(lineno);
      const auto fields = detail::split_tabs(line);
      if (fields.size() != ncols) {
        throw ParseError(where + ": expected " + std::to_string(ncols) + " columns, got " +
                         std::to_string(fields.size()));
      }
      RawFact f;
      f.subject = fields[col_s];
      f.relation = fields[col_r];
      f.object = fields[col_o];
      if (f.subject.empty() || f.relation.empty() || f.object.empty()) throw ParseError(where + ": empty name field");
      try {
        f.begin = detail::parse_time_label(fields[col_b], config.granularity, config.missing_token);
        f.end = detail::parse_time_label(fields[col_e], config.granularity, config.missing_token);
      } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
      } catch (const RangeError& e) {
        throw RangeError(where + ": " + e.what());
      }
      if (!f.begin.missing && !f.end.missing && f.begin.value > f.end.value) {
        switch (config.inverted_intervals) {
          case InvertedIntervalPolicy::error: throw ParseError(where + ": interval begin after end");
          case InvertedIntervalPolicy::swap: std::swap(f.begin, f.end); break;
          case InvertedIntervalPolicy::drop: continue;
        }
      }
      for (const auto* l : {&f.begin, &f.end}) {
        if (l->missing) continue;
        lo = lo ? std::min(*lo, l->value) : l->value;
        hi = hi ? std::max(*hi, l->value) : l->value;
      }
      raw[static_cast<std::size_t>(fold)].push_back(std::move(f));
    }
  }
  if (!lo) throw ParseError("dataset " + config.path.string() + " has no time labels");

  Vocabulary vocab;
  vocab.granularity = config.granularity;
  vocab.label_origin = *lo;
  std::array<std::vector<Fact>, 3> folds;
  for (std::size_t k = 0; k < 3; ++k) {
    for (const auto& r : raw[k]) {
      Fact f;
      f.subject = vocab.intern_entity(r.subject);
      f.relation = vocab.intern_relation(r.relation);
      f.object = vocab.intern_entity(r.object);
      f.interval.begin = r.begin.missing ? kNegUnbounded : r.begin.value - *lo;
      f.interval.end = r.end.missing ? kPosUnbounded : r.end.value - *lo;
      folds[k].push_back(f);
    }
  }
  TemporalKB kb(std::move(vocab), std::move(folds), InstantDomain{0, *hi - *lo});
  return config.add_inverse ? add_inverse_facts(kb) : kb;
}

// Writes base (non-inverse) facts of every fold in the default 5-column layout.
inline void write_dataset(const TemporalKB& kb, const std::filesystem::path& dir,
                          std::string_view missing_token = "-") {
  std::filesystem::create_directories(dir);
  const auto& v = kb.vocab();
  for (Fold fold : {Fold::train, Fold::dev, Fold::test}) {
    std::ofstream out(dir / fold_file_name(fold));
    for (const auto& f : kb.fold(fold)) {
      if (v.is_inverse(f.relation)) continue;
      out << v.entity_name(f.subject) << '\t' << v.relation_name(f.relation) << '\t' << v.entity_name(f.object)
          << '\t' << (f.interval.begin_bounded() ? v.instant_label(f.interval.begin) : std::string(missing_token))
          << '\t' << (f.interval.end_bounded() ? v.instant_label(f.interval.end) : std::string(missing_token))
          << '\n';
    }
  }
  nlohmann::json j = {{"granularity", to_string(v.granularity)}, {"missing_token", missing_token}};
  std::ofstream(dir / "dataset.json") << j.dump(2) << '\n';
}

}  // namespace tkbc
