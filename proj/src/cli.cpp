#include "modgraph/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "modgraph/checkpoint.hpp"
#include "modgraph/config.hpp"
#include "modgraph/error.hpp"
#include "modgraph/eval.hpp"
#include "modgraph/experiment.hpp"
#include "modgraph/keyvalue.hpp"
#include "modgraph/reports.hpp"
#include "modgraph/suites.hpp"
#include "modgraph/trainer.hpp"

namespace modgraph {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "experiment config file (defaults apply when omitted)");
  cmd->add_option("--out", o.out, "output directory (overrides [experiment] output)");
  cmd->add_option("--seed", o.seed, "run seed (overrides the first configured seed)");
}

struct Run {
  ExperimentConfig cfg;
  fs::path out;
  std::uint64_t seed = 0;
  std::string echo;
};

Run resolve(const CommonOptions& o) {
  Run r;
  if (o.config.empty()) {
    std::istringstream empty;
    r.cfg = parse_config(empty, "<defaults>");
  } else {
    r.cfg = load_config(o.config);
  }
  r.out = o.out.empty() ? r.cfg.output_dir : fs::path(o.out);
  r.seed = o.seed.value_or(r.cfg.seeds.front());
  r.echo = echo_config(r.cfg);
  fs::create_directories(r.out);
  std::ofstream log(r.out / "run.log");
  log << "# " << kVersion << "\n# seed " << r.seed << "\n" << r.echo;
  return r;
}

void log_warnings(const Run& r, const TrainingReport& report) {
  std::ofstream log(r.out / "run.log", std::ios::app);
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
}

int cmd_generate(const CommonOptions& o, std::ostream& out) {
  Run r = resolve(o);
  if (r.cfg.dataset.kind != DatasetSourceKind::kSynthetic) {
    throw ConfigError("generate needs a synthetic dataset source");
  }
  const Dataset ds = generate_synthetic(r.cfg.dataset.synthetic, data_seed(r.cfg, r.seed));
  const fs::path manifest = write_dataset(ds, r.out / "data");
  write_run_manifest(r.out / "run_manifest.json", "generate", r.echo, r.seed, {manifest});
  out << "wrote " << manifest.string() << '\n';
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& graph, std::ostream& out) {
  Run r = resolve(o);
  const PreparedData data = prepare_data(r.cfg, r.seed);
  const GraphKind kind = graph.empty() ? r.cfg.train.graph_kind : parse_graph_kind(graph);
  const TrainResult result = train(data.train, train_config_for(r.cfg, r.seed, kind));
  log_warnings(r, result.report);
  const std::vector<fs::path> files{r.out / "checkpoint.txt", r.out / "training_report.csv",
                                    r.out / "graph_snapshots.jsonl"};
  write_checkpoint(result.state.checkpoint(), files[0]);
  write_training_report(files[1], result.state);
  write_graph_snapshots(files[2], result.report, result.state.modality_names);
  write_run_manifest(r.out / "run_manifest.json", "train", r.echo, r.seed, files);
  out << "trained " << to_string(kind) << " for " << result.state.step << " steps ("
      << result.report.skipped_steps << " skipped); checkpoint " << files[0].string() << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint, std::ostream& out) {
  Run r = resolve(o);
  const PreparedData data = prepare_data(r.cfg, r.seed);
  const TrainState state = TrainState::from_checkpoint(read_checkpoint(checkpoint));
  const Evaluation ev = evaluate(state, data.train, data.test);
  const std::vector<fs::path> files{r.out / "metrics.json", r.out / "confusion.csv"};
  write_metrics_json(files[0], r.seed, {{"checkpoint", "multi", ev.metrics}});
  write_confusion_csv(files[1], ev.metrics);
  write_run_manifest(r.out / "run_manifest.json", "eval", r.echo, r.seed, files);
  out << "accuracy " << format_number(ev.metrics.accuracy) << " precision " << format_number(ev.metrics.precision)
      << " recall " << format_number(ev.metrics.recall) << " (" << ev.instances.size() << " scored, "
      << ev.unscored << " unscored)\n";
  return 0;
}

int cmd_baseline(const CommonOptions& o, const std::string& modality, std::ostream& out) {
  Run r = resolve(o);
  const PreparedData data = prepare_data(r.cfg, r.seed);
  std::vector<std::size_t> which;
  if (modality.empty()) {
    for (std::size_t k = 0; k < data.train.modalities.size(); ++k) which.push_back(k);
  } else {
    which.push_back(data.train.modality_index(modality));
  }
  std::vector<NamedMetrics> results;
  std::vector<fs::path> files;
  for (std::size_t k : which) {
    const auto& name = data.train.modalities[k].name;
    const TrainResult res = unimodal_baseline(data.train, k, train_config_for(r.cfg, r.seed, r.cfg.train.graph_kind));
    log_warnings(r, res.report);
    const Evaluation ev = evaluate(res.state, data.train, data.test);
    results.push_back({"unimodal", name, ev.metrics});
    files.push_back(r.out / name / "checkpoint.txt");
    write_checkpoint(res.state.checkpoint(), files.back());
    files.push_back(r.out / name / "confusion.csv");
    write_confusion_csv(files.back(), ev.metrics);
    out << "baseline " << name << ": accuracy " << format_number(ev.metrics.accuracy) << '\n';
  }
  files.push_back(r.out / "metrics.json");
  write_metrics_json(files.back(), r.seed, results);
  write_run_manifest(r.out / "run_manifest.json", "baseline", r.echo, r.seed, files);
  return 0;
}

int cmd_oracle(const std::string& out_dir, std::uint64_t seed, std::ostream& out) {
  std::optional<fs::path> dir;
  if (!out_dir.empty()) {
    dir = fs::path(out_dir);
    fs::create_directories(*dir);
  }
  const auto results = oracle::run_all_suites(seed, dir);
  bool all = true;
  std::ostringstream csv;
  csv << "suite,passed,seconds,detail\n";
  for (const auto& s : results) {
    all = all && s.passed;
    out << (s.passed ? "PASS " : "FAIL ") << s.name << ": " << s.detail << " [" << format_number(s.seconds)
        << " s]\n";
    csv << s.name << ',' << (s.passed ? 1 : 0) << ',' << format_number(s.seconds) << ",\"" << s.detail << "\"\n";
  }
  out << (all ? "all oracle suites passed\n" : "some oracle suites FAILED\n");
  if (dir) {
    std::ofstream(*dir / "oracle_summary.csv") << csv.str();
    write_run_manifest(*dir / "run_manifest.json", "oracle", "", seed,
                       {*dir / "oracle_summary.csv", *dir / "mst_check.csv", *dir / "arrangement_gap.csv"});
  }
  return all ? 0 : 1;
}

std::string table_text(const std::vector<SummaryRow>& rows) {
  std::ostringstream t;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-8s %-16s %-16s %-16s\n", "Model", "Modality", "Accuracy", "Precision",
                "Recall");
  t << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %-8s %-17s %-17s %-17s\n", r.model.c_str(), r.modality.c_str(),
                  format_mean_std(r.accuracy).c_str(), format_mean_std(r.precision).c_str(),
                  format_mean_std(r.recall).c_str());
    t << line;
  }
  return t.str();
}

int cmd_sweep(const CommonOptions& o, const std::string& seeds, bool no_baselines, std::ostream& out) {
  Run r = resolve(o);
  std::vector<std::uint64_t> seed_list = r.cfg.seeds;
  if (!seeds.empty()) {
    seed_list.clear();
    for (const auto& s : split(seeds, ',')) seed_list.push_back(std::stoull(trim(s)));
  }
  std::vector<std::vector<NamedMetrics>> per_seed;
  std::vector<fs::path> files;
  for (std::uint64_t seed : seed_list) {
    per_seed.push_back(run_seed(r.cfg, seed, !no_baselines));
    files.push_back(r.out / ("seed_" + std::to_string(seed)) / "metrics.json");
    write_metrics_json(files.back(), seed, per_seed.back());
  }
  const auto rows = summarize(per_seed);
  files.push_back(r.out / "summary.csv");
  {
    std::ofstream csv(files.back());
    csv << "model,modality,seeds,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,recall_std\n";
    for (const auto& row : rows) {
      csv << row.model << ',' << row.modality << ',' << row.seeds << ',' << format_number(row.accuracy.mean) << ','
          << format_number(row.accuracy.stddev) << ',' << format_number(row.precision.mean) << ','
          << format_number(row.precision.stddev) << ',' << format_number(row.recall.mean) << ','
          << format_number(row.recall.stddev) << '\n';
    }
  }
  const std::string table = table_text(rows);
  files.push_back(r.out / "summary.txt");
  std::ofstream(files.back()) << table;
  write_run_manifest(r.out / "run_manifest.json", "sweep", r.echo, seed_list.front(), files);
  out << table;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-scheduled multimodal contrastive learning experiments", "modgraph"};
  app.require_subcommand(1);

  CommonOptions gen_opts, train_opts, eval_opts, base_opts, sweep_opts;
  std::string graph, checkpoint, modality, seeds, oracle_out;
  std::uint64_t oracle_seed = 7;
  bool no_baselines = false;

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset (manifest + tables)");
  add_common(gen, gen_opts);
  auto* trn = app.add_subcommand("train", "train encoders, write checkpoint and training report");
  add_common(trn, train_opts);
  trn->add_option("--graph", graph, "graph kind override: mst or fcg");
  auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on the held-out split");
  add_common(evl, eval_opts);
  evl->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  auto* base = app.add_subcommand("baseline", "train and evaluate unimodal baselines");
  add_common(base, base_opts);
  base->add_option("--modality", modality, "single modality name (default: all)");
  auto* orc = app.add_subcommand("oracle", "run the brute-force verification suites");
  orc->add_option("--out", oracle_out, "directory for oracle CSV reports");
  orc->add_option("--seed", oracle_seed, "suite seed");
  auto* swp = app.add_subcommand("sweep", "seed sweep comparing MST, FCG and unimodal baselines");
  add_common(swp, sweep_opts);
  swp->add_option("--seeds", seeds, "comma-separated seed list (overrides config)");
  swp->add_flag("--no-baselines", no_baselines, "skip unimodal baselines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*gen) return cmd_generate(gen_opts, out);
    if (*trn) return cmd_train(train_opts, graph, out);
    if (*evl) return cmd_eval(eval_opts, checkpoint, out);
    if (*base) return cmd_baseline(base_opts, modality, out);
    if (*orc) return cmd_oracle(oracle_out, oracle_seed, out);
    if (*swp) return cmd_sweep(sweep_opts, seeds, no_baselines, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace modgraph
