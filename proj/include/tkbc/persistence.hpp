#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tkbc/error.hpp"
#include "tkbc/gadgets.hpp"
#include "tkbc/inference.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/model.hpp"

namespace tkbc {

inline constexpr int kBundleFormatVersion = 1;

struct ModelBundle {
  Model model;
  std::optional<GadgetParams> gadgets;
  ThresholdTable thresholds;
  double kappa = 0.0;
  double lambda = 0.0;
  std::size_t base_relations = 0;
  Granularity granularity = Granularity::year;
  Instant label_origin = 0;
  nlohmann::json config = nlohmann::json::object();
};

namespace detail {

inline void write_f32(const std::filesystem::path& file, std::span<const float> data) {
  std::vector<std::uint32_t> words(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(data[i]);
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    words[i] = w;
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!out) throw Error("failed writing " + file.string());
}

inline std::vector<float> read_f32(const std::filesystem::path& file, const std::string& name, std::size_t expected) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(file, ec);
  if (ec) throw FormatError("array '" + name + "': cannot read " + file.string());
  if (bytes != expected * 4) {
    throw FormatError("array '" + name + "': expected " + std::to_string(expected) + " floats, file holds " +
                      std::to_string(bytes) + " bytes");
  }
  std::vector<std::uint32_t> words(expected);
  std::ifstream in(file, std::ios::binary);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected * 4));
  if (!in) throw FormatError("array '" + name + "': short read from " + file.string());
  std::vector<float> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t w = words[i];
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    out[i] = std::bit_cast<float>(w);
  }
  return out;
}

inline const char* table_name(Table t) {
  switch (t) {
    case Table::entity: return "entity";
    case Table::rel_so: return "relation_so";
    case Table::rel_st: return "relation_st";
    case Table::rel_ot: return "relation_ot";
    case Table::time: return "time";
  }
  return "";
}

}  // namespace detail

// Writes manifest.json plus one little-endian float32 file per array. Embedding tables are
// stored as rows x dim real parts followed by rows x dim imaginary parts.
inline void save_model(const ModelBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& sh = b.model.shape();
  const auto& w = b.model.weights();
  nlohmann::json arrays = nlohmann::json::array();
  auto put = [&](const std::string& name, std::span<const float> data) {
    const std::string file = name + ".f32";
    detail::write_f32(dir / file, data);
    arrays.push_back({{"name", name}, {"file", file}, {"length", data.size()}});
  };
  const auto params = b.model.parameters();
  for (std::size_t k = 0; k < kNumTables; ++k) {
    const auto t = static_cast<Table>(k);
    const auto& lay = b.model.layout();
    put(detail::table_name(t), params.subspan(lay.offset(t), lay.table_size(t)));
  }
  nlohmann::json manifest = {
      {"format_version", kBundleFormatVersion},
      {"num_entities", sh.num_entities},
      {"num_relations", sh.num_relations},
      {"num_base_relations", b.base_relations},
      {"num_instants", sh.num_instants},
      {"dim", sh.dim},
      {"alpha", w.alpha},
      {"beta", w.beta},
      {"gamma", w.gamma},
      {"kappa", b.kappa},
      {"lambda", b.lambda},
      {"granularity", to_string(b.granularity)},
      {"label_origin", b.label_origin},
      {"thresholds", b.thresholds.theta},
      {"threshold_fallback", b.thresholds.fallback},
      {"config", b.config},
  };
  if (b.gadgets) {
    const auto& g = *b.gadgets;
    put("gadget_trainable", g.trainable);
    put("recurrence_mu", g.rec_mu);
    put("recurrence_sigma", g.rec_sigma);
    std::vector<float> mean, sd;
    std::vector<std::int64_t> count;
    for (std::size_t s = 0; s < 2; ++s) {
      mean.insert(mean.end(), g.pair_stats.mean[s].begin(), g.pair_stats.mean[s].end());
      sd.insert(sd.end(), g.pair_stats.stddev[s].begin(), g.pair_stats.stddev[s].end());
      count.insert(count.end(), g.pair_stats.count[s].begin(), g.pair_stats.count[s].end());
    }
    put("pair_mean", mean);
    put("pair_std", sd);
    manifest["gadgets"] = {{"num_relations", g.num_relations},
                           {"recurrent", g.recurrent},
                           {"pair_count", count},
                           {"sigma_floor", g.pair_stats.sigma_floor}};
  }
  manifest["arrays"] = arrays;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

inline ModelBundle load_model(const std::filesystem::path& dir) {
  const auto mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw FormatError("no model manifest at " + mpath.string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(mpath.string() + ": " + e.what());
  }
  try {
    const int version = m.at("format_version").get<int>();
    if (version != kBundleFormatVersion) {
      throw FormatError("incompatible model format version " + std::to_string(version) + " (this build reads " +
                        std::to_string(kBundleFormatVersion) + ")");
    }
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> files;
    for (const auto& a : m.at("arrays")) {
      files[a.at("name").get<std::string>()] = {a.at("file").get<std::string>(), a.at("length").get<std::size_t>()};
    }
    auto read = [&](const std::string& name, std::size_t expected) {
      auto it = files.find(name);
      if (it == files.end()) throw FormatError("array '" + name + "' missing from manifest");
      if (it->second.second != expected) {
        throw FormatError("array '" + name + "': manifest length " + std::to_string(it->second.second) +
                          " does not match expected " + std::to_string(expected));
      }
      return detail::read_f32(dir / it->second.first, name, expected);
    };

    ModelBundle b;
    const ModelShape shape{m.at("num_entities").get<std::size_t>(), m.at("num_relations").get<std::size_t>(),
                           m.at("num_instants").get<std::size_t>(), m.at("dim").get<std::size_t>()};
    const HyperWeights w{m.at("alpha").get<double>(), m.at("beta").get<double>(), m.at("gamma").get<double>()};
    b.model = Model(shape, w);
    auto params = b.model.parameters();
    for (std::size_t k = 0; k < kNumTables; ++k) {
      const auto t = static_cast<Table>(k);
      const auto& lay = b.model.layout();
      const auto data = read(detail::table_name(t), lay.table_size(t));
      std::copy(data.begin(), data.end(), params.begin() + static_cast<std::ptrdiff_t>(lay.offset(t)));
    }
    b.kappa = m.at("kappa").get<double>();
    b.lambda = m.at("lambda").get<double>();
    b.base_relations = m.at("num_base_relations").get<std::size_t>();
    b.granularity = granularity_from_string(m.at("granularity").get<std::string>());
    b.label_origin = m.at("label_origin").get<Instant>();
    b.thresholds.theta = m.at("thresholds").get<std::vector<double>>();
    b.thresholds.fallback = m.at("threshold_fallback").get<double>();
    b.config = m.value("config", nlohmann::json::object());
    if (m.contains("gadgets")) {
      const auto& gj = m.at("gadgets");
      const std::size_t nr = gj.at("num_relations").get<std::size_t>();
      GadgetParams g(nr);
      g.recurrent = gj.at("recurrent").get<std::vector<std::uint8_t>>();
      if (g.recurrent.size() != nr) throw FormatError("gadget recurrent flags have the wrong length");
      const auto count = gj.at("pair_count").get<std::vector<std::int64_t>>();
      if (count.size() != 2 * nr * nr) throw FormatError("gadget pair counts have the wrong length");
      g.pair_stats.sigma_floor = gj.at("sigma_floor").get<double>();
      g.trainable = read("gadget_trainable", g.trainable.size());
      g.rec_mu = read("recurrence_mu", nr);
      g.rec_sigma = read("recurrence_sigma", nr);
      const auto mean = read("pair_mean", 2 * nr * nr);
      const auto sd = read("pair_std", 2 * nr * nr);
      for (std::size_t s = 0; s < 2; ++s) {
        const auto off = static_cast<std::ptrdiff_t>(s * nr * nr);
        const auto len = static_cast<std::ptrdiff_t>(nr * nr);
        g.pair_stats.mean[s].assign(mean.begin() + off, mean.begin() + off + len);
        g.pair_stats.stddev[s].assign(sd.begin() + off, sd.begin() + off + len);
        g.pair_stats.count[s].assign(count.begin() + off, count.begin() + off + len);
      }
      b.gadgets = std::move(g);
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(mpath.string() + ": " + e.what());
  }
}

}  // namespace tkbc
