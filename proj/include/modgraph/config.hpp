#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "modgraph/dataset.hpp"
#include "modgraph/trainer.hpp"

namespace modgraph {

enum class DatasetSourceKind { kSynthetic, kManifest };

struct DatasetSource {
  DatasetSourceKind kind = DatasetSourceKind::kSynthetic;
  std::filesystem::path manifest;
  SynthSpec synthetic;
  /// Fixed generator/missingness seed; when unset the run seed is used.
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  DatasetSource dataset;
  TrainConfig train;
  double test_fraction = 0.2;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";

  void validate() const;
};

/// Three-class benchmark: four informative modalities (one with 20% of its
/// rows missing) and one pure-noise modality, 2500 instances.
SynthSpec default_synth_spec();

/// Parses the key-value config grammar (docs/formats.md). Relative manifest
/// paths resolve against `base_dir`. Unknown sections or keys and
/// out-of-range values raise ConfigError.
ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field, defaults included, in the same grammar parse_config reads.
std::string echo_config(const ExperimentConfig& cfg);

}  // namespace modgraph
