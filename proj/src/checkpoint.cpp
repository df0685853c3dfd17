#include "modgraph/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "modgraph/error.hpp"

namespace modgraph {

namespace {

constexpr const char* kMagic = "modgraph-checkpoint";
constexpr int kVersion = 1;

void write_hex(std::ostream& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  out.write(buf, end - buf);
}

void write_matrix(std::ostream& out, const char* tag, const Matrix& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      write_hex(out, m(i, j));
    }
    out << '\n';
  }
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail("unexpected end of file");
    return w;
  }

  void expect(const std::string& token) {
    const std::string w = word();
    if (w != token) fail("expected '" + token + "', found '" + w + "'");
  }

  std::size_t count() {
    const std::string w = word();
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size()) fail("bad count '" + w + "'");
    return v;
  }

  double hex() {
    const std::string w = word();
    double v = 0.0;
    const char* first = w.data();
    const char* last = w.data() + w.size();
    // to_chars(hex) emits a leading '-' but never "0x".
    auto [p, ec] = std::from_chars(first, last, v, std::chars_format::hex);
    if (ec != std::errc() || p != last) fail("bad hexadecimal float '" + w + "'");
    return v;
  }

  Matrix matrix(const std::string& tag) {
    expect(tag);
    const std::size_t r = count();
    const std::size_t c = count();
    Matrix m(r, c);
    for (double& v : m.data()) v = hex();
    return m;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_ + ": " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out << kMagic << ' ' << kVersion << '\n';
  out << "encoders " << checkpoint.encoders.size() << '\n';
  for (const auto& e : checkpoint.encoders) {
    if (e.modality.empty() || e.modality.find_first_of(" \t\r\n") != std::string::npos) {
      throw ConfigError("modality name '" + e.modality + "' cannot be stored in a checkpoint");
    }
    const auto& spec = e.params.spec;
    out << "encoder " << e.modality << " active " << (e.active ? 1 : 0) << " activation "
        << to_string(spec.activation) << " input " << spec.input_dim << " embedding "
        << spec.embedding_dim << " hidden " << spec.hidden_dims.size();
    for (std::size_t h : spec.hidden_dims) out << ' ' << h;
    out << " layers " << e.params.layers.size() << '\n';
    for (const auto& layer : e.params.layers) {
      write_matrix(out, "weight", layer.weight);
      write_matrix(out, "bias", layer.bias);
    }
  }
  out << "end\n";
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  Reader r(in, path.string());
  r.expect(kMagic);
  if (r.count() != kVersion) r.fail("unsupported checkpoint version");
  r.expect("encoders");
  const std::size_t n = r.count();
  Checkpoint cp;
  for (std::size_t k = 0; k < n; ++k) {
    CheckpointEntry e;
    r.expect("encoder");
    e.modality = r.word();
    r.expect("active");
    e.active = r.count() != 0;
    r.expect("activation");
    try {
      e.params.spec.activation = parse_activation(r.word());
    } catch (const ConfigError& err) {
      r.fail(err.what());
    }
    r.expect("input");
    e.params.spec.input_dim = r.count();
    r.expect("embedding");
    e.params.spec.embedding_dim = r.count();
    r.expect("hidden");
    e.params.spec.hidden_dims.assign(r.count(), 0);
    for (auto& h : e.params.spec.hidden_dims) h = r.count();
    r.expect("layers");
    const std::size_t layers = r.count();
    if (layers != e.params.spec.hidden_dims.size() + 1) r.fail("layer count does not match spec");
    const auto& spec = e.params.spec;
    std::size_t fan_in = spec.input_dim;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t fan_out = l < spec.hidden_dims.size() ? spec.hidden_dims[l] : spec.embedding_dim;
      DenseLayer layer;
      layer.weight = r.matrix("weight");
      layer.bias = r.matrix("bias");
      if (layer.weight.rows() != fan_in || layer.weight.cols() != fan_out || layer.bias.rows() != 1 ||
          layer.bias.cols() != fan_out) {
        r.fail("layer " + std::to_string(l) + " of encoder " + e.modality + " has shape " +
               layer.weight.shape_string() + " / " + layer.bias.shape_string() + ", expected " +
               std::to_string(fan_in) + "x" + std::to_string(fan_out));
      }
      e.params.layers.push_back(std::move(layer));
      fan_in = fan_out;
    }
    cp.encoders.push_back(std::move(e));
  }
  r.expect("end");
  return cp;
}

}  // namespace modgraph
