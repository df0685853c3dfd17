#include "modgraph/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "modgraph/error.hpp"
#include "modgraph/keyvalue.hpp"
#include "modgraph/random.hpp"

namespace modgraph {

namespace fs = std::filesystem;

std::size_t ModalityTable::present_count() const {
  return static_cast<std::size_t>(std::count(present.begin(), present.end(), true));
}

std::size_t Dataset::modality_index(const std::string& name) const {
  for (std::size_t k = 0; k < modalities.size(); ++k)
    if (modalities[k].name == name) return k;
  throw ConfigError("unknown modality '" + name + "'");
}

void Dataset::validate() const {
  const std::size_t n = size();
  if (!labels.empty() && labels.size() != n) {
    throw ConsistencyError("label count " + std::to_string(labels.size()) + " does not match " +
                           std::to_string(n) + " instances");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count) {
      throw ConsistencyError("instance " + instance_ids[i] + " has label " +
                             std::to_string(labels[i]) + " outside [0, " +
                             std::to_string(class_count) + ")");
    }
  }
  for (const auto& t : modalities) {
    if (t.present.size() != n || t.features.rows() != n || t.features.cols() != t.feature_dim) {
      throw ConsistencyError("modality " + t.name + " does not share the instance index");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (t.present[i]) continue;
      auto row = t.features.row(i);
      if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) {
        throw ConsistencyError("absent row " + instance_ids[i] + " of modality " + t.name +
                               " is not zeroed");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool any = std::any_of(modalities.begin(), modalities.end(),
                                 [i](const ModalityTable& t) { return t.present[i]; });
    if (!any) throw ConsistencyError("instance " + instance_ids[i] + " is absent in every modality");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.class_count = class_count;
  for (std::size_t i : indices) {
    out.instance_ids.push_back(instance_ids[i]);
    if (has_labels()) out.labels.push_back(labels[i]);
  }
  for (const auto& t : modalities) {
    ModalityTable s{t.name, t.feature_dim, gather_rows(t.features, indices), {}};
    for (std::size_t i : indices) s.present.push_back(t.present[i]);
    out.modalities.push_back(std::move(s));
  }
  return out;
}

void SynthSpec::validate() const {
  if (class_count < 2) throw ConfigError("class_count must be >= 2");
  if (latent_dim < class_count) {
    throw ConfigError("latent_dim must be >= class_count so centroids can be orthogonal");
  }
  if (instances < 1) throw ConfigError("instances must be >= 1");
  if (!(latent_jitter >= 0.0)) throw ConfigError("latent_jitter must be >= 0");
  std::size_t informative = 0;
  std::set<std::string> names;
  for (const auto& m : modalities) {
    if (m.feature_dim < 1) throw ConfigError("modality " + m.name + ": feature_dim must be >= 1");
    if (!(m.noise_scale >= 0.0)) throw ConfigError("modality " + m.name + ": noise_scale must be >= 0");
    if (!(m.missing_rate >= 0.0 && m.missing_rate < 1.0)) {
      throw ConfigError("modality " + m.name + ": missing_rate must lie in [0, 1)");
    }
    if (!names.insert(m.name).second) throw ConfigError("duplicate modality name '" + m.name + "'");
    if (m.kind == ModalityKind::kInformative) ++informative;
  }
  if (informative < 2) throw ConfigError("at least 2 informative modalities are required");
}

namespace {

// Orthonormal columns via Gram-Schmidt on Gaussian draws.
std::vector<std::vector<double>> orthonormal_directions(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<std::vector<double>> dirs;
  while (dirs.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    for (const auto& d : dirs) {
      const double p = dot(v, d);
      for (std::size_t k = 0; k < dim; ++k) v[k] -= p * d[k];
    }
    const double n = norm(v);
    if (n < 1e-6) continue;
    for (double& x : v) x /= n;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

std::string instance_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%05zu", i);
  return buf;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.instances;
  const std::size_t m = spec.modalities.size();

  Rng centroid_rng(derive_seed(seed, 0));
  // Orthonormal directions scaled by sqrt(2) sit at pairwise distance exactly
  // 2. Centering them keeps those distances and gives every view zero mean.
  auto centroids = orthonormal_directions(spec.class_count, spec.latent_dim, centroid_rng);
  std::vector<double> mean(spec.latent_dim, 0.0);
  for (auto& c : centroids) {
    for (std::size_t k = 0; k < spec.latent_dim; ++k) {
      c[k] *= std::sqrt(2.0);
      mean[k] += c[k] / static_cast<double>(spec.class_count);
    }
  }
  for (auto& c : centroids)
    for (std::size_t k = 0; k < spec.latent_dim; ++k) c[k] -= mean[k];

  Dataset ds;
  ds.class_count = spec.class_count;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.instance_ids.push_back(instance_name(i));
    ds.labels[i] = i % spec.class_count;
  }
  Rng label_rng(derive_seed(seed, 1));
  std::shuffle(ds.labels.begin(), ds.labels.end(), label_rng.engine());

  Rng latent_rng(derive_seed(seed, 2));
  Matrix latent(n, spec.latent_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = centroids[ds.labels[i]];
    for (std::size_t k = 0; k < spec.latent_dim; ++k) {
      latent(i, k) = c[k] + spec.latent_jitter * latent_rng.normal();
    }
  }

  for (std::size_t k = 0; k < m; ++k) {
    const auto& ms = spec.modalities[k];
    ModalityTable t{ms.name, ms.feature_dim, Matrix(n, ms.feature_dim), std::vector<bool>(n, true)};
    Rng noise_rng(derive_seed(seed, 200 + k));
    if (ms.kind == ModalityKind::kInformative) {
      Rng mix_rng(derive_seed(seed, 100 + k));
      const Matrix mixing = mix_rng.normal_matrix(spec.latent_dim, ms.feature_dim,
                                                  1.0 / std::sqrt(static_cast<double>(spec.latent_dim)));
      t.features = matmul(latent, mixing);
    }
    for (double& v : t.features.data()) v += ms.noise_scale * noise_rng.normal();
    ds.modalities.push_back(std::move(t));
  }

  Rng mask_rng(derive_seed(seed, 3));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> row(m);
    do {
      for (std::size_t k = 0; k < m; ++k) row[k] = mask_rng.bernoulli(1.0 - spec.modalities[k].missing_rate);
    } while (std::none_of(row.begin(), row.end(), [](bool b) { return b; }));
    for (std::size_t k = 0; k < m; ++k) {
      if (row[k]) continue;
      ds.modalities[k].present[i] = false;
      auto r = ds.modalities[k].features.row(i);
      std::fill(r.begin(), r.end(), 0.0);
    }
  }
  return ds;
}

Dataset apply_missingness(Dataset ds, std::span<const double> rates, std::uint64_t seed) {
  const std::size_t m = ds.modalities.size();
  if (rates.size() != m) {
    throw ShapeError(std::to_string(rates.size()) + " missingness rates for " + std::to_string(m) +
                     " modalities");
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (!(rates[k] >= 0.0 && rates[k] < 1.0)) {
      throw ConfigError("missingness rate for " + ds.modalities[k].name + " must lie in [0, 1)");
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<std::size_t> before;
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < m; ++k) {
      if (!ds.modalities[k].present[i]) continue;
      before.push_back(k);
      if (!rng.bernoulli(rates[k])) kept.push_back(k);
    }
    if (kept.empty() && !before.empty()) kept.push_back(before[rng.index(before.size())]);
    for (std::size_t k : before) {
      if (std::find(kept.begin(), kept.end(), k) != kept.end()) continue;
      ds.modalities[k].present[i] = false;
      auto r = ds.modalities[k].features.row(i);
      std::fill(r.begin(), r.end(), 0.0);
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {ds.subset(train), ds.subset(test)};
}

// ---------------------------------------------------------------------------
// Manifest + table files

namespace {

constexpr const char* kManifestFormat = "modgraph-dataset-1";

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

struct CsvTable {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> cells;  // without the id column
};

CsvTable read_csv(const fs::path& path, std::size_t expected_cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table " + path.string());
  CsvTable t;
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split(trim(line), ',');
  if (header.size() != expected_cols + 1) {
    throw ParseError(path.string() + ": header has " + std::to_string(header.size() - 1) +
                     " value columns, expected " + std::to_string(expected_cols));
  }
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != expected_cols + 1) {
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " columns, expected " +
                       std::to_string(expected_cols + 1));
    }
    t.ids.push_back(trim(cells[0]));
    if (t.ids.back().empty()) throw ParseError(path.string() + ": row " + std::to_string(row) + " has no id");
    cells.erase(cells.begin());
    for (auto& c : cells) c = trim(c);
    t.cells.push_back(std::move(cells));
  }
  return t;
}

double parse_cell(const std::string& cell, const fs::path& path, std::size_t row, std::size_t col) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v)) {
    throw ParseError(path.string() + ": row " + std::to_string(row) + ", column " +
                     std::to_string(col) + ": non-numeric cell '" + cell + "'");
  }
  return v;
}

std::size_t parse_count(const KeyValue& kv, const fs::path& path) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
  if (ec != std::errc() || p != kv.value.data() + kv.value.size()) {
    throw ParseError(path.string() + ":" + std::to_string(kv.line) + ": '" + kv.key +
                     "' expects a non-negative integer");
  }
  return v;
}

std::string describe_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size() && k < 10; ++k) out += (k ? ", " : "") + ids[k];
  if (ids.size() > 10) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

struct ModalityEntry {
  std::string name;
  fs::path path;
  std::size_t feature_dim = 0;
};

}  // namespace

Dataset load_dataset(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) throw IoError("manifest not found: " + manifest_path.string());
  const auto sections = parse_key_value_file(manifest_path);
  const fs::path base = manifest_path.parent_path();

  Dataset ds;
  std::optional<fs::path> labels_path;
  std::vector<ModalityEntry> entries;
  for (const auto& sec : sections) {
    if (sec.name.empty()) {
      for (const auto& kv : sec.entries) {
        if (kv.key == "format") {
          if (kv.value != kManifestFormat) {
            throw ParseError(manifest_path.string() + ": unsupported format '" + kv.value + "'");
          }
        } else if (kv.key == "class_count") {
          ds.class_count = parse_count(kv, manifest_path);
        } else if (kv.key == "labels") {
          labels_path = base / kv.value;
        } else {
          throw ParseError(manifest_path.string() + ":" + std::to_string(kv.line) + ": unknown key '" +
                           kv.key + "'");
        }
      }
    } else if (sec.name == "modality") {
      ModalityEntry e;
      for (const auto& kv : sec.entries) {
        if (kv.key == "name") e.name = kv.value;
        else if (kv.key == "path") e.path = base / kv.value;
        else if (kv.key == "feature_dim") e.feature_dim = parse_count(kv, manifest_path);
        else {
          throw ParseError(manifest_path.string() + ":" + std::to_string(kv.line) +
                           ": unknown key '" + kv.key + "'");
        }
      }
      if (e.name.empty() || e.path.empty() || e.feature_dim == 0) {
        throw ParseError(manifest_path.string() + ":" + std::to_string(sec.line) +
                         ": modality needs name, path and feature_dim >= 1");
      }
      entries.push_back(std::move(e));
    } else {
      throw ParseError(manifest_path.string() + ":" + std::to_string(sec.line) + ": unknown section [" +
                       sec.name + "]");
    }
  }
  if (entries.empty()) throw ParseError(manifest_path.string() + ": no modalities listed");

  std::vector<CsvTable> tables;
  for (const auto& e : entries) tables.push_back(read_csv(e.path, e.feature_dim));

  std::optional<CsvTable> label_table;
  if (labels_path) label_table = read_csv(*labels_path, 1);

  ds.instance_ids = label_table ? label_table->ids : tables.front().ids;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.instance_ids.size(); ++i) {
    if (!index.emplace(ds.instance_ids[i], i).second) {
      throw ConsistencyError("duplicate instance id " + ds.instance_ids[i]);
    }
  }
  const std::size_t n = ds.instance_ids.size();

  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    const auto& t = tables[k];
    std::set<std::string> seen;
    std::vector<std::string> offending;
    for (const auto& id : t.ids) {
      if (!index.contains(id) || !seen.insert(id).second) offending.push_back(id);
    }
    for (const auto& id : ds.instance_ids)
      if (!seen.contains(id)) offending.push_back(id);
    if (!offending.empty()) {
      throw ConsistencyError("instance ids of " + e.path.string() + " do not match the dataset index: " +
                             describe_ids(offending));
    }
    ModalityTable mt{e.name, e.feature_dim, Matrix(n, e.feature_dim), std::vector<bool>(n, false)};
    for (std::size_t r = 0; r < t.ids.size(); ++r) {
      const std::size_t i = index.at(t.ids[r]);
      const auto& cells = t.cells[r];
      const bool missing = std::any_of(cells.begin(), cells.end(), [](const std::string& c) { return c.empty(); });
      if (missing) continue;
      mt.present[i] = true;
      for (std::size_t c = 0; c < cells.size(); ++c) mt.features(i, c) = parse_cell(cells[c], e.path, r + 1, c + 1);
    }
    ds.modalities.push_back(std::move(mt));
  }

  if (label_table) {
    ds.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& cell = label_table->cells[r][0];
      const double v = parse_cell(cell, *labels_path, r + 1, 1);
      if (v < 0 || v != std::floor(v)) {
        throw ParseError(labels_path->string() + ": row " + std::to_string(r + 1) + ": label '" + cell +
                         "' is not a class index");
      }
      ds.labels[r] = static_cast<std::size_t>(v);
    }
    if (ds.class_count == 0) {
      ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    }
  }
  ds.validate();
  return ds;
}

fs::path write_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  const fs::path manifest = dir / "dataset.manifest";
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write " + manifest.string());
  out << "format = " << kManifestFormat << '\n';
  out << "class_count = " << ds.class_count << '\n';
  if (ds.has_labels()) {
    out << "labels = labels.csv\n";
    std::ofstream lab(dir / "labels.csv");
    if (!lab) throw IoError("cannot write " + (dir / "labels.csv").string());
    lab << "id,label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) lab << ds.instance_ids[i] << ',' << ds.labels[i] << '\n';
  }
  for (const auto& t : ds.modalities) {
    const std::string file = t.name + ".csv";
    out << "\n[modality]\nname = " << t.name << "\npath = " << file << "\nfeature_dim = " << t.feature_dim
        << '\n';
    std::ofstream tab(dir / file);
    if (!tab) throw IoError("cannot write " + (dir / file).string());
    tab << "id";
    for (std::size_t c = 0; c < t.feature_dim; ++c) tab << ",f" << c;
    tab << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
      tab << ds.instance_ids[i];
      for (std::size_t c = 0; c < t.feature_dim; ++c) {
        tab << ',';
        if (t.present[i]) tab << format_double(t.features(i, c));
      }
      tab << '\n';
    }
  }
  return manifest;
}

}  // namespace modgraph
