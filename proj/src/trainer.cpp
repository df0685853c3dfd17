#include "modgraph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "modgraph/alignment.hpp"
#include "modgraph/error.hpp"
#include "modgraph/random.hpp"

namespace modgraph {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kPlain ? "plain" : "momentum";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "plain") return OptimizerKind::kPlain;
  if (name == "momentum") return OptimizerKind::kMomentum;
  throw ConfigError("unknown optimizer '" + name + "' (expected plain or momentum)");
}

void TrainConfig::validate() const {
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
  for (std::size_t h : hidden_dims)
    if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must satisfy temperature > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must satisfy learning_rate > 0");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (update_interval < 1) throw ConfigError("update_interval must be >= 1");
  if (!(ema_beta >= 0.0 && ema_beta <= 1.0)) throw ConfigError("ema_beta must lie in [0, 1]");
  if (min_overlap < 2) throw ConfigError("min_overlap must be >= 2");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

Checkpoint TrainState::checkpoint() const {
  Checkpoint cp;
  for (std::size_t k = 0; k < encoders.size(); ++k) {
    cp.encoders.push_back({modality_names[k], static_cast<bool>(active[k]), encoders[k]});
  }
  return cp;
}

TrainState TrainState::from_checkpoint(const Checkpoint& cp) {
  TrainState s;
  for (const auto& e : cp.encoders) {
    s.modality_names.push_back(e.modality);
    s.encoders.push_back(e.params);
    s.active.push_back(e.active);
  }
  s.weights = EdgeWeights(cp.encoders.size());
  s.velocity.resize(cp.encoders.size());
  return s;
}

void optimizer_step(EncoderParams& params, const std::vector<Matrix>& grads,
                    std::vector<Matrix>& velocity, const TrainConfig& cfg) {
  std::vector<Matrix*> slots;
  for (auto& layer : params.layers) {
    slots.push_back(&layer.weight);
    slots.push_back(&layer.bias);
  }
  if (grads.size() != slots.size()) {
    throw ShapeError("optimizer got " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(slots.size()) + " parameters");
  }
  for (std::size_t p = 0; p < slots.size(); ++p) {
    if (grads[p].rows() != slots[p]->rows() || grads[p].cols() != slots[p]->cols()) {
      throw ShapeError("gradient " + grads[p].shape_string() + " does not match parameter " +
                       slots[p]->shape_string());
    }
    if (!all_finite(grads[p])) throw TrainingError("non-finite gradient");
  }
  const bool momentum = cfg.optimizer == OptimizerKind::kMomentum;
  if (momentum && velocity.size() != slots.size()) {
    velocity.clear();
    for (auto* s : slots) velocity.emplace_back(s->rows(), s->cols());
  }
  for (std::size_t p = 0; p < slots.size(); ++p) {
    auto& theta = slots[p]->data();
    const auto& g = grads[p].data();
    if (momentum) {
      auto& v = velocity[p].data();
      for (std::size_t k = 0; k < theta.size(); ++k) {
        v[k] = cfg.momentum * v[k] + g[k];
        theta[k] -= cfg.learning_rate * v[k];
      }
    } else {
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg.learning_rate * g[k];
    }
  }
}

namespace {

struct Batch {
  std::vector<std::size_t> instances;
};

// Minibatches for one epoch: a fresh shuffle cut into floor(n / batch_size)
// batches, or a single batch when n < batch_size.
std::vector<Batch> epoch_batches(std::vector<std::size_t> pool, std::size_t batch_size, Rng& rng) {
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  std::vector<Batch> out;
  if (pool.size() < batch_size) {
    out.push_back({pool});
    return out;
  }
  for (std::size_t start = 0; start + batch_size <= pool.size(); start += batch_size) {
    Batch b;
    b.instances.assign(pool.begin() + static_cast<std::ptrdiff_t>(start),
                       pool.begin() + static_cast<std::ptrdiff_t>(start + batch_size));
    out.push_back(std::move(b));
  }
  return out;
}

EmbeddingMatrix embed_batch(const EncoderParams& params, const ModalityTable& table,
                            const std::vector<std::size_t>& instances) {
  EmbeddingMatrix out;
  out.rows = Matrix(instances.size(), params.spec.embedding_dim);
  out.present.resize(instances.size());
  std::vector<std::size_t> rows;
  std::vector<std::size_t> slots;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    out.present[k] = table.present[instances[k]];
    if (out.present[k]) {
      rows.push_back(instances[k]);
      slots.push_back(k);
    }
  }
  if (rows.empty()) return out;
  const Matrix z = encode_rows(params, gather_rows(table.features, rows));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    auto src = z.row(k);
    std::copy(src.begin(), src.end(), out.rows.row(slots[k]).begin());
  }
  return out;
}

std::vector<Matrix> collect_grads(const ad::Tape& tape, const BoundEncoder& enc) {
  std::vector<Matrix> g;
  for (const auto& v : enc.vars) g.push_back(tape.grad(v));
  return g;
}

TrainState initial_state(const Dataset& ds, const TrainConfig& cfg) {
  TrainState s;
  for (std::size_t k = 0; k < ds.modalities.size(); ++k) {
    const auto& t = ds.modalities[k];
    EncoderSpec spec{t.feature_dim, cfg.hidden_dims, cfg.embedding_dim, cfg.activation};
    s.modality_names.push_back(t.name);
    s.encoders.push_back(init_encoder(spec, derive_seed(cfg.seed, 1000 + k)));
  }
  s.active.assign(ds.modalities.size(), true);
  s.weights = EdgeWeights(ds.modalities.size());
  s.velocity.resize(ds.modalities.size());
  return s;
}

std::string edge_name(const TrainState& s, std::size_t i, std::size_t j) {
  return "(" + s.modality_names[i] + ", " + s.modality_names[j] + ")";
}

}  // namespace

std::optional<double> train_edge_step(TrainState& s, const Dataset& ds, const GraphEdge& e,
                                      std::span<const std::size_t> instances, const TrainConfig& cfg) {
  std::vector<std::size_t> shared;
  for (std::size_t inst : instances) {
    if (ds.modalities[e.i].present[inst] && ds.modalities[e.j].present[inst]) shared.push_back(inst);
  }
  if (shared.size() < cfg.min_overlap) return std::nullopt;

  ad::Tape tape;
  const BoundEncoder enc_i = bind_encoder(tape, s.encoders[e.i]);
  const BoundEncoder enc_j = bind_encoder(tape, s.encoders[e.j]);
  ad::Var zi = encode_on_tape(enc_i, tape.constant(gather_rows(ds.modalities[e.i].features, shared)));
  ad::Var zj = encode_on_tape(enc_j, tape.constant(gather_rows(ds.modalities[e.j].features, shared)));
  ad::Var loss = contrastive_edge_loss(zi, zj, cfg.temperature);
  tape.backward(loss);
  auto gi = collect_grads(tape, enc_i);
  auto gj = collect_grads(tape, enc_j);
  try {
    optimizer_step(s.encoders[e.i], gi, s.velocity[e.i], cfg);
    optimizer_step(s.encoders[e.j], gj, s.velocity[e.j], cfg);
  } catch (const TrainingError& err) {
    throw TrainingError(std::string(err.what()) + " on edge " + edge_name(s, e.i, e.j) + " at step " +
                        std::to_string(s.step));
  }
  const double value = loss.value()(0, 0);
  s.history.push_back({s.step, e.i, e.j, value, e.rho});
  return value;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.modalities.size() < 2) throw TrainingError("training needs at least 2 modalities");
  if (ds.size() < 2) throw TrainingError("training needs at least 2 instances");

  TrainResult result;
  TrainState& s = result.state;
  s = initial_state(ds, cfg);

  std::set<std::size_t> protected_ids;
  for (const auto& name : cfg.protected_modalities) protected_ids.insert(ds.modality_index(name));

  std::vector<std::size_t> pool(ds.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng batch_rng(derive_seed(cfg.seed, 1));
  bool has_weights = false;
  bool pruned = cfg.prune_count == 0 || cfg.graph_kind == GraphKind::kFullyConnected;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const Batch& batch : epoch_batches(pool, cfg.batch_size, batch_rng)) {
      if (s.step % cfg.update_interval == 0) {
        std::vector<EmbeddingMatrix> emb;
        for (std::size_t k = 0; k < ds.modalities.size(); ++k) {
          emb.push_back(embed_batch(s.encoders[k], ds.modalities[k], batch.instances));
        }
        const EdgeWeights observed = estimate_edge_weights(emb, cfg.min_overlap);
        s.weights = has_weights ? update_edge_weights(s.weights, observed, cfg.ema_beta) : observed;
        has_weights = true;
        const bool warming_up = s.step < cfg.fcg_warmup;
        if (!pruned && !warming_up) {
          s.active = prune_nodes(s.weights, cfg.prune_count, protected_ids, s.active);
          pruned = true;
        }
        s.graph = cfg.graph_kind == GraphKind::kMinimumSpanningTree && !warming_up
                      ? kruskal_mst(s.weights, s.active)
                      : build_fcg(s.weights, s.active);
        result.report.snapshots.push_back({s.step, s.graph, s.weights});
      }

      std::size_t trained = 0;
      for (const GraphEdge& e : s.graph.edges) {
        if (train_edge_step(s, ds, e, batch.instances, cfg)) ++trained;
      }
      if (trained == 0) {
        ++result.report.skipped_steps;
        result.report.warnings.push_back("step " + std::to_string(s.step) +
                                         ": no graph edge reached min_overlap; iteration skipped");
      }
      ++s.step;
    }
  }
  if (result.report.skipped_steps == s.step) {
    throw TrainingError("every iteration was skipped: no modality pair reached min_overlap");
  }
  return result;
}

TrainResult unimodal_baseline(const Dataset& ds, std::size_t modality, const TrainConfig& cfg) {
  cfg.validate();
  if (modality >= ds.modalities.size()) {
    throw ConfigError("baseline modality index " + std::to_string(modality) + " out of range");
  }
  if (!ds.has_labels()) throw TrainingError("the unimodal baseline needs labels");

  TrainResult result;
  TrainState& s = result.state;
  s = initial_state(ds, cfg);
  s.active.assign(ds.modalities.size(), false);
  s.active[modality] = true;

  const auto& table = ds.modalities[modality];
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (table.present[i]) pool.push_back(i);
  if (pool.size() < 2) throw TrainingError("modality " + table.name + " has fewer than 2 present instances");

  Rng batch_rng(derive_seed(cfg.seed, 1));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const Batch& batch : epoch_batches(pool, cfg.batch_size, batch_rng)) {
      // Classes seen in this batch, mapped to dense target ids.
      std::vector<std::size_t> classes;
      for (std::size_t inst : batch.instances) classes.push_back(ds.labels[inst]);
      std::sort(classes.begin(), classes.end());
      classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
      if (classes.size() < 2) {
        ++result.report.skipped_steps;
        result.report.warnings.push_back("step " + std::to_string(s.step) +
                                         ": batch holds a single class; iteration skipped");
        ++s.step;
        continue;
      }
      std::vector<std::size_t> targets;
      Matrix averaging(classes.size(), batch.instances.size());
      std::vector<double> counts(classes.size(), 0.0);
      for (std::size_t b = 0; b < batch.instances.size(); ++b) {
        const auto c = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), ds.labels[batch.instances[b]]) - classes.begin());
        targets.push_back(c);
        averaging(c, b) = 1.0;
        counts[c] += 1.0;
      }
      for (std::size_t c = 0; c < classes.size(); ++c)
        for (double& v : averaging.row(c)) v /= counts[c];

      ad::Tape tape;
      const BoundEncoder enc = bind_encoder(tape, s.encoders[modality]);
      ad::Var z = encode_on_tape(enc, tape.constant(gather_rows(table.features, batch.instances)));
      ad::Var means = ad::l2_normalize_rows(ad::matmul(tape.constant(averaging), z));
      ad::Var logits = ad::scale(ad::matmul_nt(z, means), 1.0 / cfg.temperature);
      ad::Var loss = ad::cross_entropy_rows(logits, targets);
      tape.backward(loss);
      try {
        optimizer_step(s.encoders[modality], collect_grads(tape, enc), s.velocity[modality], cfg);
      } catch (const TrainingError& err) {
        throw TrainingError(std::string(err.what()) + " in baseline " + table.name + " at step " +
                            std::to_string(s.step));
      }
      s.history.push_back({s.step, modality, modality, loss.value()(0, 0), 1.0});
      ++s.step;
    }
  }
  if (result.report.skipped_steps == s.step) throw TrainingError("every baseline iteration was skipped");
  return result;
}

}  // namespace modgraph
