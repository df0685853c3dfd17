#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "modgraph/encoder.hpp"

namespace modgraph {

struct CheckpointEntry {
  std::string modality;
  bool active = true;
  EncoderParams params;

  bool operator==(const CheckpointEntry&) const = default;
};

/// Encoder parameters of one experiment, keyed by modality name.
struct Checkpoint {
  std::vector<CheckpointEntry> encoders;

  bool operator==(const Checkpoint&) const = default;
};

/// Text layout with hexadecimal floats, see docs/formats.md. Reading back a
/// written checkpoint reproduces every parameter bit for bit.
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace modgraph
