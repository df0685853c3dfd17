#include "modgraph/reports.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "modgraph/error.hpp"

namespace modgraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

json metrics_to_json(const Metrics& m) {
  return json{{"accuracy", m.accuracy},   {"precision", m.precision}, {"recall", m.recall},
              {"total", m.total},         {"confusion", m.confusion}};
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_training_report(const fs::path& path, const TrainState& state) {
  auto out = open_out(path);
  out << "step,modality_i,modality_j,loss,rho\n";
  for (const auto& r : state.history) {
    out << r.step << ',' << state.modality_names[r.i] << ',' << state.modality_names[r.j] << ','
        << format_number(r.loss) << ',' << format_number(r.rho) << '\n';
  }
}

void write_graph_snapshots(const fs::path& path, const TrainingReport& report,
                           const std::vector<std::string>& names) {
  auto out = open_out(path);
  for (const auto& snap : report.snapshots) {
    json active = json::array();
    for (std::size_t k = 0; k < snap.graph.active.size(); ++k)
      if (snap.graph.active[k]) active.push_back(names[k]);
    json edges = json::array();
    for (const auto& e : snap.graph.edges) {
      edges.push_back({{"i", names[e.i]}, {"j", names[e.j]}, {"rho", e.rho}, {"distance", e.distance}});
    }
    json rho = json::array();
    for (std::size_t i = 0; i < snap.weights.size(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < snap.weights.size(); ++j) {
        row.push_back(snap.weights.valid(i, j) ? json(snap.weights.rho(i, j)) : json(nullptr));
      }
      rho.push_back(std::move(row));
    }
    out << json{{"step", snap.step}, {"kind", to_string(snap.graph.kind)}, {"active", active}, {"edges", edges},
                {"rho", rho}}
               .dump()
        << '\n';
  }
}

void write_confusion_csv(const fs::path& path, const Metrics& m) {
  auto out = open_out(path);
  out << "true\\predicted";
  for (std::size_t c = 0; c < m.confusion.size(); ++c) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < m.confusion.size(); ++r) {
    out << r;
    for (std::size_t v : m.confusion[r]) out << ',' << v;
    out << '\n';
  }
}

void write_metrics_json(const fs::path& path, std::uint64_t seed, const std::vector<NamedMetrics>& results) {
  json models = json::array();
  for (const auto& r : results) {
    json entry = metrics_to_json(r.metrics);
    entry["model"] = r.model;
    entry["modality"] = r.modality;
    models.push_back(std::move(entry));
  }
  auto out = open_out(path);
  out << json{{"seed", seed}, {"models", models}}.dump(2) << '\n';
}

std::vector<NamedMetrics> read_metrics_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
    std::vector<NamedMetrics> out;
    for (const auto& e : doc.at("models")) {
      NamedMetrics nm;
      nm.model = e.at("model").get<std::string>();
      nm.modality = e.at("modality").get<std::string>();
      nm.metrics.accuracy = e.at("accuracy").get<double>();
      nm.metrics.precision = e.at("precision").get<double>();
      nm.metrics.recall = e.at("recall").get<double>();
      nm.metrics.total = e.at("total").get<std::size_t>();
      nm.metrics.confusion = e.at("confusion").get<std::vector<std::vector<std::size_t>>>();
      out.push_back(std::move(nm));
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_run_manifest(const fs::path& path, const std::string& command, const std::string& config_echo,
                        std::uint64_t seed, const std::vector<fs::path>& outputs) {
  json files = json::array();
  for (const auto& p : outputs) files.push_back(p.filename().string());
  auto out = open_out(path);
  out << json{{"command", command}, {"version", kVersion}, {"seed", seed}, {"config", config_echo}, {"outputs", files}}
             .dump(2)
      << '\n';
}

}  // namespace modgraph
