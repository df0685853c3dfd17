#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "modgraph/dataset.hpp"
#include "modgraph/encoder.hpp"
#include "modgraph/trainer.hpp"

namespace modgraph {

/// Per class, per active modality: the unit-normalized mean train embedding.
struct ClassPrototypes {
  std::size_t class_count = 0;
  /// Active modality ids in concatenation order.
  std::vector<std::size_t> modalities;
  /// prototypes[block] is class_count × d.
  std::vector<Matrix> prototypes;

  const std::span<const double> get(std::size_t cls, std::size_t block) const {
    return prototypes[block].row(cls);
  }
};

/// Embeddings of every modality over `ds`; inactive modalities come back
/// with an all-absent mask.
std::vector<EmbeddingMatrix> embed_dataset(const TrainState& state, const Dataset& ds);

ClassPrototypes class_prototypes(const TrainState& state, const Dataset& train);
ClassPrototypes class_prototypes(std::span<const EmbeddingMatrix> embeddings,
                                 std::span<const std::size_t> active_modalities,
                                 std::span<const std::size_t> labels, std::size_t class_count,
                                 std::span<const std::string> modality_names);

/// Concatenated cosine over the blocks where the instance is present; absent
/// blocks are dropped from both the query and every class vector. Ties go to
/// the lowest class index.
std::size_t classify(const ClassPrototypes& protos, std::span<const EmbeddingMatrix> embeddings,
                     std::size_t instance);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t total = 0;
};

/// Macro metrics from a confusion matrix. A class never predicted adds 0 to
/// the precision average; a class with no true instances adds 0 to recall.
/// class_count = 0 infers it from the largest index seen.
Metrics compute_metrics(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                        std::size_t class_count = 0);

struct Evaluation {
  Metrics metrics;
  std::vector<std::size_t> instances;  // evaluated instance positions in test
  std::vector<std::size_t> predictions;
  /// Instances absent from every active modality, skipped.
  std::size_t unscored = 0;
};

/// Prototypes from `train`, predictions for every `test` instance that is
/// present in at least one active modality.
Evaluation evaluate(const TrainState& state, const Dataset& train, const Dataset& test);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

/// "0.916 ± 0.014"
std::string format_mean_std(const MeanStd& v, int decimals = 3);

}  // namespace modgraph
