#include "modgraph/experiment.hpp"

#include <algorithm>

#include "modgraph/error.hpp"
#include "modgraph/eval.hpp"
#include "modgraph/random.hpp"

namespace modgraph {

std::uint64_t data_seed(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  return cfg.dataset.seed.value_or(run_seed);
}

PreparedData prepare_data(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  PreparedData p;
  const std::uint64_t seed = data_seed(cfg, run_seed);
  if (cfg.dataset.kind == DatasetSourceKind::kSynthetic) {
    p.full = generate_synthetic(cfg.dataset.synthetic, seed);
  } else {
    p.full = load_dataset(cfg.dataset.manifest);
  }
  auto [train, test] = split_dataset(p.full, cfg.test_fraction, derive_seed(seed, 77));
  p.train = std::move(train);
  p.test = std::move(test);
  return p;
}

TrainConfig train_config_for(const ExperimentConfig& cfg, std::uint64_t run_seed, GraphKind kind) {
  TrainConfig t = cfg.train;
  t.seed = run_seed;
  t.graph_kind = kind;
  return t;
}

std::vector<NamedMetrics> run_seed(const ExperimentConfig& cfg, std::uint64_t run_seed, bool with_baselines) {
  const PreparedData data = prepare_data(cfg, run_seed);
  std::vector<NamedMetrics> out;
  for (GraphKind kind : {GraphKind::kMinimumSpanningTree, GraphKind::kFullyConnected}) {
    const auto result = train(data.train, train_config_for(cfg, run_seed, kind));
    out.push_back({kind == GraphKind::kMinimumSpanningTree ? "MST" : "FCG", "multi",
                   evaluate(result.state, data.train, data.test).metrics});
  }
  if (with_baselines) {
    for (std::size_t k = 0; k < data.train.modalities.size(); ++k) {
      const auto result = unimodal_baseline(data.train, k, train_config_for(cfg, run_seed, cfg.train.graph_kind));
      out.push_back({"unimodal", data.train.modalities[k].name,
                     evaluate(result.state, data.train, data.test).metrics});
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<std::vector<NamedMetrics>>& per_seed) {
  struct Acc {
    std::string model;
    std::string modality;
    std::vector<double> acc, prec, rec;
  };
  std::vector<Acc> groups;
  for (const auto& seed_results : per_seed) {
    for (const auto& r : seed_results) {
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const Acc& g) { return g.model == r.model && g.modality == r.modality; });
      if (it == groups.end()) {
        groups.push_back({r.model, r.modality, {}, {}, {}});
        it = std::prev(groups.end());
      }
      it->acc.push_back(r.metrics.accuracy);
      it->prec.push_back(r.metrics.precision);
      it->rec.push_back(r.metrics.recall);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& g : groups) {
    rows.push_back({g.model, g.modality, mean_std(g.acc), mean_std(g.prec), mean_std(g.rec), g.acc.size()});
  }
  return rows;
}

}  // namespace modgraph
