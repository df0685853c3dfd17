#include "modgraph/encoder.hpp"

#include <cmath>

#include "modgraph/error.hpp"
#include "modgraph/random.hpp"

namespace modgraph {

std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "' (expected tanh or relu)");
}

void EncoderSpec::validate() const {
  if (input_dim == 0) throw ConfigError("encoder input_dim must be >= 1");
  if (embedding_dim == 0) throw ConfigError("encoder embedding_dim must be >= 1");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ConfigError("encoder hidden dims must be >= 1");
  }
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

EncoderParams init_encoder(const EncoderSpec& spec, std::uint64_t seed) {
  spec.validate();
  EncoderParams params;
  params.spec = spec;
  Rng rng(seed);
  std::vector<std::size_t> dims{spec.input_dim};
  dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  dims.push_back(spec.embedding_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double s = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    params.layers.push_back({rng.uniform_matrix(dims[l], dims[l + 1], -s, s), Matrix(1, dims[l + 1])});
  }
  return params;
}

namespace {

void activate(Matrix& m, Activation a) {
  for (double& v : m.data()) v = a == Activation::kTanh ? std::tanh(v) : std::max(v, 0.0);
}

void check_input(const EncoderParams& params, std::size_t cols) {
  if (cols != params.spec.input_dim) {
    throw ShapeError("encoder expects " + std::to_string(params.spec.input_dim) +
                     " input features, got " + std::to_string(cols));
  }
}

}  // namespace

Matrix encode_rows(const EncoderParams& params, const Matrix& features) {
  check_input(params, features.cols());
  Matrix h = features;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    h = add_row_bias(matmul(h, params.layers[l].weight), params.layers[l].bias);
    if (l + 1 < params.layers.size()) activate(h, params.spec.activation);
  }
  return l2_normalize_rows(h);
}

EmbeddingMatrix encode(const EncoderParams& params, const ModalityTable& table) {
  check_input(params, table.feature_dim);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < table.present.size(); ++i)
    if (table.present[i]) rows.push_back(i);

  EmbeddingMatrix out;
  out.rows = Matrix(table.instance_count(), params.spec.embedding_dim);
  out.present = table.present;
  if (rows.empty()) return out;
  const Matrix z = encode_rows(params, gather_rows(table.features, rows));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto src = z.row(k);
    std::copy(src.begin(), src.end(), out.rows.row(rows[k]).begin());
  }
  return out;
}

BoundEncoder bind_encoder(ad::Tape& tape, const EncoderParams& params) {
  BoundEncoder b;
  b.params = &params;
  for (const auto& layer : params.layers) {
    b.vars.push_back(tape.parameter(layer.weight));
    b.vars.push_back(tape.parameter(layer.bias));
  }
  return b;
}

ad::Var encode_on_tape(const BoundEncoder& encoder, ad::Var features) {
  check_input(*encoder.params, features.value().cols());
  ad::Var h = features;
  const std::size_t n_layers = encoder.params->layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    h = ad::add_row_bias(ad::matmul(h, encoder.vars[2 * l]), encoder.vars[2 * l + 1]);
    if (l + 1 < n_layers) {
      h = encoder.params->spec.activation == Activation::kTanh ? ad::tanh(h) : ad::relu(h);
    }
  }
  return ad::l2_normalize_rows(h);
}

}  // namespace modgraph
