#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modgraph/checkpoint.hpp"
#include "modgraph/dataset.hpp"
#include "modgraph/encoder.hpp"
#include "modgraph/graph.hpp"

namespace modgraph {

enum class OptimizerKind { kPlain, kMomentum };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

struct TrainConfig {
  // Encoder architecture shared by every modality.
  std::size_t embedding_dim = 32;
  std::vector<std::size_t> hidden_dims{64};
  Activation activation = Activation::kTanh;

  double temperature = 0.1;
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  GraphKind graph_kind = GraphKind::kMinimumSpanningTree;
  /// Batches between graph rebuilds.
  std::size_t update_interval = 10;
  double ema_beta = 0.9;
  std::size_t prune_count = 0;
  /// MST mode only: rebuilds before this step use the full graph. Pruning
  /// happens once, at the first rebuild with step >= fcg_warmup.
  std::size_t fcg_warmup = 0;
  std::vector<std::string> protected_modalities;
  std::size_t min_overlap = 8;
  OptimizerKind optimizer = OptimizerKind::kMomentum;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field and its valid range.
  void validate() const;
};

struct EdgeStepRecord {
  std::size_t step = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  double loss = 0.0;
  double rho = 0.0;

  bool operator==(const EdgeStepRecord&) const = default;
};

struct GraphSnapshot {
  std::size_t step = 0;
  ModalityGraph graph;
  EdgeWeights weights;
};

struct TrainState {
  /// Number of iterations taken (the batch counter).
  std::size_t step = 0;
  std::vector<std::string> modality_names;
  std::vector<EncoderParams> encoders;
  std::vector<bool> active;
  EdgeWeights weights;
  ModalityGraph graph;
  /// One record per trained edge per iteration.
  std::vector<EdgeStepRecord> history;
  /// Per modality, one buffer per parameter matrix; empty unless momentum.
  std::vector<std::vector<Matrix>> velocity;

  Checkpoint checkpoint() const;
  static TrainState from_checkpoint(const Checkpoint& cp);
};

struct TrainingReport {
  std::vector<GraphSnapshot> snapshots;
  std::vector<std::string> warnings;
  std::size_t skipped_steps = 0;
};

struct TrainResult {
  TrainState state;
  TrainingReport report;
};

/// Graph-scheduled contrastive training. Every update_interval batches the
/// edge weights are re-estimated on the current minibatch, EMA-merged, and
/// the graph rebuilt (MST: prune, then Kruskal; FCG: every valid edge).
/// Every iteration then trains each graph edge once, in graph edge order,
/// updating both endpoint encoders.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

/// One contrastive step on edge (e.i, e.j) over the instances of `instances`
/// present in both modalities: updates exactly those two encoders and appends
/// a history record. Returns the loss, or nullopt when the overlap is below
/// min_overlap and nothing was changed.
std::optional<double> train_edge_step(TrainState& state, const Dataset& ds, const GraphEdge& edge,
                                      std::span<const std::size_t> instances, const TrainConfig& cfg);

/// plain: θ ← θ − lr·g; momentum: v ← μ·v + g, θ ← θ − lr·v.
/// `velocity` is resized on first use. Throws TrainingError on a non-finite
/// gradient.
void optimizer_step(EncoderParams& params, const std::vector<Matrix>& grads,
                    std::vector<Matrix>& velocity, const TrainConfig& cfg);

/// Supervised single-encoder reference: a softmax over cosine similarity to
/// the minibatch class means, pulling each embedding toward its own class.
/// Only `modality` is active in the returned state.
TrainResult unimodal_baseline(const Dataset& ds, std::size_t modality, const TrainConfig& cfg);

}  // namespace modgraph
