#pragma once

#include <cstdint>
#include <vector>

#include "modgraph/config.hpp"
#include "modgraph/dataset.hpp"
#include "modgraph/reports.hpp"
#include "modgraph/trainer.hpp"

namespace modgraph {

struct PreparedData {
  Dataset full;
  Dataset train;
  Dataset test;
};

/// Seed that drives dataset generation and the train/test split.
std::uint64_t data_seed(const ExperimentConfig& cfg, std::uint64_t run_seed);

/// Generates or loads the dataset and splits it. Deterministic per (cfg, seed).
PreparedData prepare_data(const ExperimentConfig& cfg, std::uint64_t run_seed);

TrainConfig train_config_for(const ExperimentConfig& cfg, std::uint64_t run_seed, GraphKind kind);

/// MST, FCG and (optionally) one unimodal baseline per modality on one seed.
std::vector<NamedMetrics> run_seed(const ExperimentConfig& cfg, std::uint64_t run_seed,
                                   bool with_baselines = true);

/// One row of an aggregated comparison table.
struct SummaryRow {
  std::string model;
  std::string modality;
  MeanStd accuracy;
  MeanStd precision;
  MeanStd recall;
  std::size_t seeds = 0;
};

/// Groups per-seed results by (model, modality) in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<std::vector<NamedMetrics>>& per_seed);

}  // namespace modgraph
