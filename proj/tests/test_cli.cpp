#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "support/fixtures.hpp"
#include "tkbc/dataset.hpp"
#include "tkbc/persistence.hpp"

using namespace tkbc;
using tkbc::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& args, const fs::path& scratch) {
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string(TKBC_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kAssembly = fs::path(TKBC_TEST_DATA) / "assembly";

// Object queries rank Pierre, Paul, Alain, Claude, Jean, then the assembly itself; subject
// queries over the inverse relation put the assembly first.
void write_assembly_model(const fs::path& dir) {
  DatasetConfig cfg;
  cfg.path = kAssembly;
  const auto kb = parse_dataset(cfg);
  const auto& v = kb.vocab();
  ModelBundle b;
  b.model = Model({kb.num_entities(), kb.num_relations(), kb.num_instants(), 2}, {0, 0, 0});
  const std::pair<const char*, float> order[] = {{"Pierre", 5},   {"Paul", 4},   {"Alain", 3},
                                                 {"Claude", 2},   {"Jean", 1.5}, {"NationalAssembly", 1}};
  for (const auto& [name, value] : order) b.model.row(Table::entity, *v.find_entity(name)).re[0] = value;
  b.model.row(Table::entity, *v.find_entity("NationalAssembly")).re[1] = 10;
  b.model.row(Table::entity, *v.find_entity("Jean")).re[1] = 1;
  const auto r = *v.find_relation("hasMember");
  b.model.row(Table::rel_so, r).re[0] = 1;
  b.model.row(Table::rel_so, v.inverse_of(r)).re[1] = 1;
  b.base_relations = v.num_base_relations();
  b.thresholds = ThresholdTable(b.base_relations);
  b.granularity = v.granularity;
  b.label_origin = v.label_origin;
  save_model(b, dir);
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

// A few people with births, marriages and workplaces over forty years.
void write_small_dataset(const fs::path& dir) {
  fs::create_directories(dir);
  std::string train, valid, test;
  for (int i = 0; i < 12; ++i) {
    const std::string p = "person" + std::to_string(i);
    const int born = 1950 + 2 * i;
    train += p + "\twasBornIn\tcity" + std::to_string(i % 3) + "\t" + std::to_string(born) + "\t" +
             std::to_string(born) + "\n";
    const std::string line = p + "\tworksAt\torg" + std::to_string(i % 4) + "\t" + std::to_string(born + 20) + "\t" +
                             std::to_string(born + 25) + "\n";
    (i % 6 == 0 ? test : i % 6 == 1 ? valid : train) += line;
  }
  write_text(dir / "train.txt", train);
  write_text(dir / "valid.txt", valid);
  write_text(dir / "test.txt", test);
}

void write_config(const fs::path& p) {
  write_text(p, R"({"dim": 4, "epochs": 4, "batch_size": 8, "validate_every": 2, "phase2_epochs": 2,
                    "phase2_negatives": 5, "seed": 3})");
}

}  // namespace

TEST(Cli, EvalLinkOnAssemblyExample) {
  TempDir tmp;
  write_assembly_model(tmp.path() / "model");
  const auto base = "eval-link --data " + kAssembly.string() + " --model " + (tmp.path() / "model").string();
  auto per_query = tmp.path() / "ranks.jsonl";
  auto r = run(base + " --per-query " + per_query.string() + " --json " + (tmp.path() / "m.json").string(),
               tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(per_query);
  std::string line;
  std::getline(in, line);
  const auto q = nlohmann::json::parse(line);
  EXPECT_EQ(q["gold"], "Jean");
  EXPECT_EQ(q["time_aware"].get<double>(), 3.25);
  EXPECT_EQ(q["unfiltered"].get<double>(), 5.0);
  EXPECT_EQ(q["time_insensitive"].get<double>(), 1.0);
  EXPECT_EQ(q["exact"].get<double>(), 4.0);
  nlohmann::json m;
  std::ifstream(tmp.path() / "m.json") >> m;
  // The subject query ranks the assembly first.
  EXPECT_NEAR(m["mrr"].get<double>(), (1 / 3.25 + 1.0) / 2, 1e-12);
  EXPECT_EQ(m["queries"], 2);

  r = run(base + " --filter unfiltered --json " + (tmp.path() / "u.json").string(), tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream(tmp.path() / "u.json") >> m;
  EXPECT_NEAR(m["mrr"].get<double>(), (1 / 5.0 + 1.0) / 2, 1e-12);
  EXPECT_NE(r.out.find("MRR"), std::string::npos);

  EXPECT_EQ(run(base + " --filter fuzzy", tmp.path()).code, 1);
}

TEST(Cli, EmptyTestFoldIsDataError) {
  TempDir tmp;
  const auto data = tmp.path() / "data";
  fs::create_directories(data);
  for (const char* f : {"train.txt", "valid.txt", "test.txt"}) fs::copy_file(kAssembly / f, data / f);
  write_text(data / "test.txt", "");
  write_text(data / "train.txt", bytes(kAssembly / "train.txt") + bytes(kAssembly / "test.txt"));
  write_assembly_model(tmp.path() / "model");
  const auto r = run("eval-link --data " + data.string() + " --model " + (tmp.path() / "model").string(), tmp.path());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("empty"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
  TempDir tmp;
  EXPECT_EQ(run("", tmp.path()).code, 1);
  EXPECT_EQ(run("eval-link --model x", tmp.path()).code, 1);
  EXPECT_EQ(run("train --data " + kAssembly.string() + " --phase 2 --from " + (tmp.path() / "none").string(),
                tmp.path())
                .code,
            1);
  write_text(tmp.path() / "bad.json", R"({"dimension": 4})");
  EXPECT_EQ(run("train --data " + kAssembly.string() + " --config " + (tmp.path() / "bad.json").string() + " --out " +
                    (tmp.path() / "m").string(),
                tmp.path())
                .code,
            1);
  EXPECT_EQ(run("eval-link --data " + (tmp.path() / "missing").string() + " --model x", tmp.path()).code, 1);
}

TEST(Cli, TrainIsDeterministicAndWritesLog) {
  TempDir tmp;
  const auto data = tmp.path() / "data";
  write_small_dataset(data);
  write_config(tmp.path() / "cfg.json");
  const auto common = "train --data " + data.string() + " --config " + (tmp.path() / "cfg.json").string() + " --gadgets";
  ASSERT_EQ(run(common + " --out " + (tmp.path() / "a").string(), tmp.path()).code, 0);
  ASSERT_EQ(run(common + " --out " + (tmp.path() / "b").string(), tmp.path()).code, 0);
  for (const char* f : {"entity.f32", "relation_so.f32", "relation_st.f32", "relation_ot.f32", "time.f32",
                        "gadget_trainable.f32"}) {
    const auto x = bytes(tmp.path() / "a" / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, bytes(tmp.path() / "b" / f)) << f;
  }
  std::ifstream log(tmp.path() / "a" / "train_log.jsonl");
  std::string line;
  int phase1 = 0, phase2 = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    (j["phase"] == 1 ? phase1 : phase2)++;
    EXPECT_TRUE(j.contains("loss"));
  }
  EXPECT_EQ(phase1, 4);
  EXPECT_EQ(phase2, 2);

  ASSERT_EQ(run(common + " --seed 4 --out " + (tmp.path() / "c").string(), tmp.path()).code, 0);
  EXPECT_NE(bytes(tmp.path() / "a" / "entity.f32"), bytes(tmp.path() / "c" / "entity.f32"));

  // Phase 2 on its own, from the phase-1 bundle.
  const auto p1 = "train --data " + data.string() + " --config " + (tmp.path() / "cfg.json").string();
  ASSERT_EQ(run(p1 + " --out " + (tmp.path() / "p1").string(), tmp.path()).code, 0);
  EXPECT_FALSE(fs::exists(tmp.path() / "p1" / "gadget_trainable.f32"));
  ASSERT_EQ(run(p1 + " --phase 2 --from " + (tmp.path() / "p1").string() + " --out " + (tmp.path() / "p2").string(),
                tmp.path())
                .code,
            0);
  EXPECT_EQ(bytes(tmp.path() / "p1" / "entity.f32"), bytes(tmp.path() / "p2" / "entity.f32"));
  EXPECT_EQ(bytes(tmp.path() / "a" / "gadget_trainable.f32"), bytes(tmp.path() / "p2" / "gadget_trainable.f32"));
}

TEST(Cli, TimeMiningDiagnosisAndReport) {
  TempDir tmp;
  const auto data = tmp.path() / "data";
  write_small_dataset(data);
  write_config(tmp.path() / "cfg.json");
  const auto model = (tmp.path() / "m").string();
  ASSERT_EQ(run("train --data " + data.string() + " --config " + (tmp.path() / "cfg.json").string() +
                    " --gadgets --out " + model,
                tmp.path())
                .code,
            0);
  const auto dm = " --data " + data.string() + " --model " + model;

  auto r = run("eval-time" + dm + " --metric aeiou --tune --json " + (tmp.path() / "t.json").string(), tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  nlohmann::json t;
  std::ifstream(tmp.path() / "t.json") >> t;
  EXPECT_TRUE(t.contains("aeiou"));
  EXPECT_FALSE(t.contains("iou"));
  EXPECT_FALSE(t.contains("tac"));
  EXPECT_EQ(t["queries"], 2);
  EXPECT_EQ(run("eval-time" + dm + " --metric f1", tmp.path()).code, 1);

  ASSERT_EQ(run("tune-thresholds" + dm, tmp.path()).code, 0);
  EXPECT_EQ(load_model(model).thresholds.theta.size(), 2u);

  r = run("mine-constraints --data " + data.string() + " --min-support 5 --out " + (tmp.path() / "c.json").string(),
          tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  nlohmann::json c;
  std::ifstream(tmp.path() / "c.json") >> c;
  ASSERT_FALSE(c["constraints"].empty());
  bool planted = false;
  for (const auto& x : c["constraints"]) planted |= x["earlier"] == "wasBornIn" && x["later"] == "worksAt";
  EXPECT_TRUE(planted);

  r = run("diagnose" + dm + " --constraints " + (tmp.path() / "c.json").string() + " --curve " +
              (tmp.path() / "curve.csv").string() + " --curve-support 5",
          tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rate"), std::string::npos);
  std::ifstream csv(tmp.path() / "curve.csv");
  std::string header, row;
  std::getline(csv, header);
  EXPECT_EQ(header, "gap,mean_l2,support");
  ASSERT_TRUE(std::getline(csv, row));
  EXPECT_EQ(row.rfind("1,", 0), 0u);
  EXPECT_EQ(run("diagnose" + dm + " --constraints " + (tmp.path() / "none.json").string(), tmp.path()).code, 1);

  r = run("export-report" + dm, tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(r.out);
  EXPECT_TRUE(rep["link_prediction"].contains("time-aware"));
  EXPECT_TRUE(rep.contains("time_prediction"));
}
