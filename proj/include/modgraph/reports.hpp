#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "modgraph/eval.hpp"
#include "modgraph/trainer.hpp"

namespace modgraph {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// step,modality_i,modality_j,loss,rho
void write_training_report(const std::filesystem::path& path, const TrainState& state);

/// One JSON object per line: step, kind, active nodes, edges with rho and
/// distance, and the full rho matrix (null where an edge is invalid).
void write_graph_snapshots(const std::filesystem::path& path, const TrainingReport& report,
                           const std::vector<std::string>& modality_names);

/// Rows true class, columns predicted class.
void write_confusion_csv(const std::filesystem::path& path, const Metrics& m);

struct NamedMetrics {
  std::string model;
  std::string modality;
  Metrics metrics;
};

/// JSON with one entry per model for a single seed.
void write_metrics_json(const std::filesystem::path& path, std::uint64_t seed,
                        const std::vector<NamedMetrics>& results);
std::vector<NamedMetrics> read_metrics_json(const std::filesystem::path& path);

/// Provenance record: config echo, seed, version, files written.
void write_run_manifest(const std::filesystem::path& path, const std::string& command,
                        const std::string& config_echo, std::uint64_t seed,
                        const std::vector<std::filesystem::path>& outputs);

inline constexpr const char* kVersion = "modgraph 1.0.0";

}  // namespace modgraph
