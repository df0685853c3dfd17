#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "modgraph/checkpoint.hpp"
#include "modgraph/cli.hpp"
#include "modgraph/eval.hpp"
#include "modgraph/reports.hpp"
#include "test_util.hpp"

namespace modgraph {
namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "modgraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

// A config small enough for end-to-end CLI runs in a few seconds.
std::filesystem::path tiny_config(const testing::TempDir& dir) {
  const auto path = dir / "tiny.conf";
  std::ofstream(path) << "[dataset]\nsource = synthetic\n[synthetic]\ninstances = 300\n"
                         "[train]\nembedding_dim = 8\nhidden_dims = 16\nepochs = 2\nbatch_size = 32\n"
                         "update_interval = 5\nprune_count = 1\n"
                         "[experiment]\nseeds = 3,4\n";
  return path;
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const CliResult r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, BadConfigIsExitTwo) {
  testing::TempDir dir;
  std::ofstream(dir / "bad.conf") << "[train]\ntemperature = -1\n";
  const CliResult r = run({"train", "--config", (dir / "bad.conf").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("temperature > 0"), std::string::npos) << r.err;
}

TEST(Cli, MissingCheckpointIsRuntimeError) {
  testing::TempDir dir;
  const CliResult r = run({"eval", "--config", tiny_config(dir).string(), "--out", (dir / "o").string(),
                           "--checkpoint", (dir / "nope.txt").string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, OracleReportsAllSuitesPassed) {
  testing::TempDir dir;
  const CliResult r = run({"oracle", "--out", dir.path().string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* suite : {"gradient", "cayley", "mst", "arrangement"}) {
    EXPECT_NE(r.out.find(std::string("PASS ") + suite), std::string::npos) << r.out;
  }
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "arrangement_gap.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "mst_check.csv"));
  const std::string gap = read_file(dir / "arrangement_gap.csv");
  EXPECT_EQ(gap.substr(0, gap.find('\n')), "draw,grouped_loss,mixed_loss,gap");
}

TEST(Cli, GenerateWritesLoadableDataset) {
  testing::TempDir dir;
  const CliResult r = run({"generate", "--config", tiny_config(dir).string(), "--out", (dir / "g").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Dataset ds = load_dataset(dir / "g" / "data" / "dataset.manifest");
  EXPECT_EQ(ds.size(), 300u);
  EXPECT_EQ(ds.modalities.size(), 5u);
}

TEST(Cli, TrainThenEvalWithProvenance) {
  testing::TempDir dir;
  const auto cfg = tiny_config(dir).string();
  const auto out = dir / "run";
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out.string(), "--seed", "5"}).code, 0);
  for (const char* f : {"checkpoint.txt", "training_report.csv", "graph_snapshots.jsonl", "run_manifest.json", "run.log"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  const std::string report = read_file(out / "training_report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "step,modality_i,modality_j,loss,rho");
  const auto manifest = nlohmann::json::parse(read_file(out / "run_manifest.json"));
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_NE(manifest["config"].get<std::string>().find("[train]"), std::string::npos);
  EXPECT_EQ(manifest["outputs"].size(), 3u);
  std::ifstream snaps(out / "graph_snapshots.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(snaps, line));
  const auto snap = nlohmann::json::parse(line);
  EXPECT_EQ(snap["step"], 0);
  EXPECT_EQ(snap["kind"], "mst");
  EXPECT_TRUE(snap.contains("edges"));
  EXPECT_TRUE(snap.contains("rho"));
  EXPECT_NE(read_file(out / "run.log").find("prune_count = 1"), std::string::npos);

  const auto eval_out = dir / "eval";
  const CliResult ev = run({"eval", "--config", cfg, "--out", eval_out.string(), "--seed", "5", "--checkpoint",
                            (out / "checkpoint.txt").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("accuracy"), std::string::npos);
  const auto metrics = read_metrics_json(eval_out / "metrics.json");
  ASSERT_EQ(metrics.size(), 1u);
  EXPECT_GT(metrics[0].metrics.accuracy, 0.5);
  EXPECT_TRUE(std::filesystem::exists(eval_out / "confusion.csv"));
}

TEST(Cli, BaselineSingleModality) {
  testing::TempDir dir;
  const auto out = dir / "b";
  const CliResult r = run({"baseline", "--config", tiny_config(dir).string(), "--out", out.string(), "--modality", "m1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = read_metrics_json(out / "metrics.json");
  ASSERT_EQ(metrics.size(), 1u);
  EXPECT_EQ(metrics[0].model, "unimodal");
  EXPECT_EQ(metrics[0].modality, "m1");
  EXPECT_TRUE(std::filesystem::exists(out / "m1" / "checkpoint.txt"));
}

TEST(Cli, SweepTableLayoutAndAggregates) {
  testing::TempDir dir;
  const auto out = dir / "s";
  const CliResult r = run({"sweep", "--config", tiny_config(dir).string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream table(r.out);
  std::string header;
  std::getline(table, header);
  for (const char* col : {"Model", "Modality", "Accuracy", "Precision", "Recall"}) {
    EXPECT_NE(header.find(col), std::string::npos) << header;
  }
  std::vector<std::string> rows;
  for (std::string line; std::getline(table, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 7u) << r.out;
  EXPECT_EQ(rows[0].rfind("MST", 0), 0u);
  EXPECT_EQ(rows[1].rfind("FCG", 0), 0u);
  const std::vector<std::string> modalities{"m0", "m1", "m2", "m3", "noise"};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(rows[2 + k].rfind("unimodal", 0), 0u);
    EXPECT_NE(rows[2 + k].find(modalities[k]), std::string::npos);
  }
  for (const auto& row : rows) {
    std::size_t count = 0;
    for (std::size_t p = row.find("±"); p != std::string::npos; p = row.find("±", p + 1)) ++count;
    EXPECT_EQ(count, 3u) << row;
  }

  // Aggregates re-derive from the per-seed files.
  const auto s3 = read_metrics_json(out / "seed_3" / "metrics.json");
  const auto s4 = read_metrics_json(out / "seed_4" / "metrics.json");
  ASSERT_EQ(s3.size(), 7u);
  ASSERT_EQ(s4.size(), 7u);
  std::istringstream csv(read_file(out / "summary.csv"));
  std::string line;
  std::getline(csv, line);
  for (std::size_t k = 0; k < 7; ++k) {
    ASSERT_TRUE(std::getline(csv, line));
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 9u);
    EXPECT_EQ(cells[0], s3[k].model);
    EXPECT_EQ(cells[1], s3[k].modality);
    const std::vector<double> acc{s3[k].metrics.accuracy, s4[k].metrics.accuracy};
    const MeanStd ms = mean_std(acc);
    EXPECT_EQ(std::stod(cells[3]), ms.mean);
    EXPECT_EQ(std::stod(cells[4]), ms.stddev);
  }
}

}  // namespace
}  // namespace modgraph
