#include "modgraph/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "modgraph/error.hpp"
#include "modgraph/keyvalue.hpp"

namespace modgraph {

namespace {

[[noreturn]] void fail(const std::string& source, const KeyValue& kv, const std::string& what) {
  throw ConfigError(source + ":" + std::to_string(kv.line) + ": " + kv.key + ": " + what);
}

std::uint64_t as_uint(const std::string& source, const KeyValue& kv) {
  std::uint64_t v = 0;
  const auto* end = kv.value.data() + kv.value.size();
  auto [p, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc() || p != end) fail(source, kv, "expected a non-negative integer, got '" + kv.value + "'");
  return v;
}

double as_double(const std::string& source, const KeyValue& kv) {
  double v = 0.0;
  const auto* end = kv.value.data() + kv.value.size();
  auto [p, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc() || p != end) fail(source, kv, "expected a number, got '" + kv.value + "'");
  return v;
}

std::vector<std::uint64_t> as_uint_list(const std::string& source, const KeyValue& kv) {
  std::vector<std::uint64_t> out;
  if (kv.value.empty()) return out;
  for (const auto& part : split(kv.value, ',')) {
    KeyValue item{kv.key, trim(part), kv.line};
    out.push_back(as_uint(source, item));
  }
  return out;
}

std::vector<std::string> as_name_list(const KeyValue& kv) {
  std::vector<std::string> out;
  if (kv.value.empty()) return out;
  for (const auto& part : split(kv.value, ',')) out.push_back(trim(part));
  return out;
}

void apply_dataset(const std::string& src, const KeyValueSection& sec, const std::filesystem::path& base,
                   DatasetSource& ds) {
  for (const auto& kv : sec.entries) {
    if (kv.key == "source") {
      if (kv.value == "synthetic") ds.kind = DatasetSourceKind::kSynthetic;
      else if (kv.value == "manifest") ds.kind = DatasetSourceKind::kManifest;
      else fail(src, kv, "expected synthetic or manifest");
    } else if (kv.key == "manifest") {
      ds.manifest = base / kv.value;
      ds.kind = DatasetSourceKind::kManifest;
    } else if (kv.key == "seed") {
      ds.seed = as_uint(src, kv);
    } else {
      fail(src, kv, "unknown key in [dataset]");
    }
  }
}

void apply_synthetic(const std::string& src, const KeyValueSection& sec, SynthSpec& s) {
  for (const auto& kv : sec.entries) {
    if (kv.key == "class_count") s.class_count = as_uint(src, kv);
    else if (kv.key == "latent_dim") s.latent_dim = as_uint(src, kv);
    else if (kv.key == "instances") s.instances = as_uint(src, kv);
    else if (kv.key == "latent_jitter") s.latent_jitter = as_double(src, kv);
    else fail(src, kv, "unknown key in [synthetic]");
  }
}

SynthModality parse_modality(const std::string& src, const KeyValueSection& sec) {
  SynthModality m;
  for (const auto& kv : sec.entries) {
    if (kv.key == "name") m.name = kv.value;
    else if (kv.key == "feature_dim") m.feature_dim = as_uint(src, kv);
    else if (kv.key == "kind") {
      if (kv.value == "informative") m.kind = ModalityKind::kInformative;
      else if (kv.value == "noise") m.kind = ModalityKind::kNoise;
      else fail(src, kv, "expected informative or noise");
    } else if (kv.key == "noise_scale") m.noise_scale = as_double(src, kv);
    else if (kv.key == "missing_rate") m.missing_rate = as_double(src, kv);
    else fail(src, kv, "unknown key in [modality]");
  }
  if (m.name.empty()) throw ConfigError(src + ":" + std::to_string(sec.line) + ": [modality] needs a name");
  return m;
}

void apply_train(const std::string& src, const KeyValueSection& sec, TrainConfig& t) {
  for (const auto& kv : sec.entries) {
    try {
      if (kv.key == "embedding_dim") t.embedding_dim = as_uint(src, kv);
      else if (kv.key == "hidden_dims") {
        t.hidden_dims.clear();
        for (auto v : as_uint_list(src, kv)) t.hidden_dims.push_back(v);
      } else if (kv.key == "activation") t.activation = parse_activation(kv.value);
      else if (kv.key == "temperature") t.temperature = as_double(src, kv);
      else if (kv.key == "learning_rate") t.learning_rate = as_double(src, kv);
      else if (kv.key == "batch_size") t.batch_size = as_uint(src, kv);
      else if (kv.key == "epochs") t.epochs = as_uint(src, kv);
      else if (kv.key == "graph") t.graph_kind = parse_graph_kind(kv.value);
      else if (kv.key == "update_interval") t.update_interval = as_uint(src, kv);
      else if (kv.key == "ema_beta") t.ema_beta = as_double(src, kv);
      else if (kv.key == "prune_count") t.prune_count = as_uint(src, kv);
      else if (kv.key == "fcg_warmup") t.fcg_warmup = as_uint(src, kv);
      else if (kv.key == "protected") t.protected_modalities = as_name_list(kv);
      else if (kv.key == "min_overlap") t.min_overlap = as_uint(src, kv);
      else if (kv.key == "optimizer") t.optimizer = parse_optimizer(kv.value);
      else if (kv.key == "momentum") t.momentum = as_double(src, kv);
      else fail(src, kv, "unknown key in [train]");
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind(src, 0) == 0) throw;
      fail(src, kv, what);
    }
  }
}

void apply_experiment(const std::string& src, const KeyValueSection& sec, ExperimentConfig& cfg) {
  for (const auto& kv : sec.entries) {
    if (kv.key == "test_fraction") cfg.test_fraction = as_double(src, kv);
    else if (kv.key == "seeds") cfg.seeds = as_uint_list(src, kv);
    else if (kv.key == "output") cfg.output_dir = kv.value;
    else fail(src, kv, "unknown key in [experiment]");
  }
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + v[k];
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out;
}

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

SynthSpec default_synth_spec() {
  SynthSpec s;
  s.class_count = 3;
  s.latent_dim = 8;
  s.instances = 2500;
  s.latent_jitter = 0.25;
  for (int k = 0; k < 4; ++k) {
    s.modalities.push_back({"m" + std::to_string(k), 16, ModalityKind::kInformative, 1.0, k == 0 ? 0.2 : 0.0});
  }
  s.modalities.push_back({"noise", 16, ModalityKind::kNoise, 1.0, 0.0});
  return s;
}

void ExperimentConfig::validate() const {
  train.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (seeds.empty()) throw ConfigError("seeds must list at least one seed");
  if (dataset.kind == DatasetSourceKind::kSynthetic) {
    dataset.synthetic.validate();
    for (const auto& name : train.protected_modalities) {
      bool found = false;
      for (const auto& m : dataset.synthetic.modalities) found = found || m.name == name;
      if (!found) throw ConfigError("protected modality '" + name + "' is not a dataset modality");
    }
  } else if (dataset.manifest.empty()) {
    throw ConfigError("dataset source 'manifest' needs a manifest path");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const std::filesystem::path& base_dir) {
  std::vector<KeyValueSection> sections;
  try {
    sections = parse_key_value(in, source);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig cfg;
  cfg.dataset.synthetic = default_synth_spec();
  std::vector<SynthModality> modalities;
  for (const auto& sec : sections) {
    if (sec.name.empty()) {
      if (!sec.entries.empty()) fail(source, sec.entries.front(), "keys must appear inside a section");
    } else if (sec.name == "dataset") {
      apply_dataset(source, sec, base_dir, cfg.dataset);
    } else if (sec.name == "synthetic") {
      apply_synthetic(source, sec, cfg.dataset.synthetic);
    } else if (sec.name == "modality") {
      modalities.push_back(parse_modality(source, sec));
    } else if (sec.name == "train") {
      apply_train(source, sec, cfg.train);
    } else if (sec.name == "experiment") {
      apply_experiment(source, sec, cfg);
    } else {
      throw ConfigError(source + ":" + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
    }
  }
  if (!modalities.empty()) cfg.dataset.synthetic.modalities = std::move(modalities);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.string(), path.parent_path());
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& d = cfg.dataset;
  out << "[dataset]\nsource = " << (d.kind == DatasetSourceKind::kSynthetic ? "synthetic" : "manifest") << '\n';
  if (d.kind == DatasetSourceKind::kManifest) out << "manifest = " << d.manifest.string() << '\n';
  if (d.seed) out << "seed = " << *d.seed << '\n';
  if (d.kind == DatasetSourceKind::kSynthetic) {
    const auto& s = d.synthetic;
    out << "\n[synthetic]\nclass_count = " << s.class_count << "\nlatent_dim = " << s.latent_dim
        << "\ninstances = " << s.instances << "\nlatent_jitter = " << num(s.latent_jitter) << '\n';
    for (const auto& m : s.modalities) {
      out << "\n[modality]\nname = " << m.name << "\nfeature_dim = " << m.feature_dim
          << "\nkind = " << (m.kind == ModalityKind::kInformative ? "informative" : "noise")
          << "\nnoise_scale = " << num(m.noise_scale) << "\nmissing_rate = " << num(m.missing_rate) << '\n';
    }
  }
  const auto& t = cfg.train;
  out << "\n[train]\nembedding_dim = " << t.embedding_dim << "\nhidden_dims = " << join_numbers(t.hidden_dims)
      << "\nactivation = " << to_string(t.activation) << "\ntemperature = " << num(t.temperature)
      << "\nlearning_rate = " << num(t.learning_rate) << "\nbatch_size = " << t.batch_size
      << "\nepochs = " << t.epochs << "\ngraph = " << to_string(t.graph_kind)
      << "\nupdate_interval = " << t.update_interval << "\nema_beta = " << num(t.ema_beta)
      << "\nprune_count = " << t.prune_count << "\nfcg_warmup = " << t.fcg_warmup
      << "\nprotected = " << join(t.protected_modalities) << "\nmin_overlap = " << t.min_overlap
      << "\noptimizer = " << to_string(t.optimizer) << "\nmomentum = " << num(t.momentum) << '\n';
  out << "\n[experiment]\ntest_fraction = " << num(cfg.test_fraction) << "\nseeds = " << join_numbers(cfg.seeds)
      << "\noutput = " << cfg.output_dir.string() << '\n';
  return out.str();
}

}  // namespace modgraph
