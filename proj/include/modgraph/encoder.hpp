#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modgraph/dataset.hpp"
#include "modgraph/matrix.hpp"
#include "modgraph/tape.hpp"

namespace modgraph {

enum class Activation { kTanh, kRelu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct EncoderSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims{64};
  std::size_t embedding_dim = 32;
  Activation activation = Activation::kTanh;

  /// Throws ConfigError if any dimension is zero.
  void validate() const;

  bool operator==(const EncoderSpec&) const = default;
};

struct DenseLayer {
  Matrix weight;  // fan_in × fan_out
  Matrix bias;    // 1 × fan_out

  bool operator==(const DenseLayer&) const = default;
};

struct EncoderParams {
  EncoderSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  bool operator==(const EncoderParams&) const = default;
};

/// Per-instance embeddings of one modality. Rows of absent instances are zero
/// and flagged absent; present rows are unit-norm.
struct EmbeddingMatrix {
  Matrix rows;
  std::vector<bool> present;

  std::size_t instance_count() const { return present.size(); }
  std::size_t dim() const { return rows.cols(); }
};

/// Glorot-uniform weights in [-s, s], s = sqrt(6 / (fan_in + fan_out)); zero biases.
EncoderParams init_encoder(const EncoderSpec& spec, std::uint64_t seed);

/// Forward pass on raw feature rows without a tape; output rows unit-norm.
Matrix encode_rows(const EncoderParams& params, const Matrix& features);

/// Encodes every present row of `table`.
EmbeddingMatrix encode(const EncoderParams& params, const ModalityTable& table);

/// Parameter leaves of one encoder on a tape, ordered W0, b0, W1, b1, ...
struct BoundEncoder {
  const EncoderParams* params = nullptr;
  std::vector<ad::Var> vars;
};

BoundEncoder bind_encoder(ad::Tape& tape, const EncoderParams& params);

/// Differentiable forward pass; `features` must live on the same tape.
ad::Var encode_on_tape(const BoundEncoder& encoder, ad::Var features);

}  // namespace modgraph
