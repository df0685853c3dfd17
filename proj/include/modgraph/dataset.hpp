#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "modgraph/matrix.hpp"

namespace modgraph {

/// One modality's features on the shared instance index. Absent rows are
/// all-zero and must not be read.
struct ModalityTable {
  std::string name;
  std::size_t feature_dim = 0;
  Matrix features;  // instances × feature_dim
  std::vector<bool> present;

  std::size_t instance_count() const { return present.size(); }
  std::size_t present_count() const;

  bool operator==(const ModalityTable&) const = default;
};

struct Dataset {
  std::vector<std::string> instance_ids;
  /// Class index per instance; empty for unlabeled data.
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;
  std::vector<ModalityTable> modalities;

  std::size_t size() const { return instance_ids.size(); }
  bool has_labels() const { return !labels.empty(); }
  std::size_t modality_index(const std::string& name) const;

  /// Throws ConsistencyError when any invariant is broken: shared index,
  /// label range, every instance present somewhere, absent rows zeroed.
  void validate() const;

  /// Instances at `indices`, in order.
  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

enum class ModalityKind { kInformative, kNoise };

struct SynthModality {
  std::string name;
  std::size_t feature_dim = 16;
  ModalityKind kind = ModalityKind::kInformative;
  double noise_scale = 1.0;
  double missing_rate = 0.0;
};

/// Planted-structure generator parameters. Each instance draws a latent
/// vector u = centroid[label] + latent_jitter·N(0, I); an informative
/// modality observes A_k·u + noise_scale·N(0, I) with A_k fixed per modality,
/// a noise modality observes noise_scale·N(0, I) only.
struct SynthSpec {
  std::size_t class_count = 3;
  std::size_t latent_dim = 8;
  std::size_t instances = 2500;
  double latent_jitter = 0.25;
  std::vector<SynthModality> modalities;

  void validate() const;
};

Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

/// Masks each (instance, modality) entry independently at rates[modality].
/// Entries already absent stay absent. An instance that would lose every
/// modality keeps one of its previously present modalities, chosen uniformly.
Dataset apply_missingness(Dataset ds, std::span<const double> rates, std::uint64_t seed);

/// Deterministic shuffled split; returns (train, test).
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                          std::uint64_t seed);

/// Reads a dataset manifest and its per-modality tables (see docs/formats.md).
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes `ds` as manifest + tables into `dir` and returns the manifest path.
/// Features use shortest round-trip decimal formatting, so a reload is
/// bit-exact.
std::filesystem::path write_dataset(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace modgraph
