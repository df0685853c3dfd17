#include "modgraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "modgraph/error.hpp"

namespace modgraph {

std::vector<EmbeddingMatrix> embed_dataset(const TrainState& state, const Dataset& ds) {
  if (state.encoders.size() != ds.modalities.size()) {
    throw ConsistencyError("state has " + std::to_string(state.encoders.size()) +
                           " encoders for a dataset with " + std::to_string(ds.modalities.size()) +
                           " modalities");
  }
  std::vector<EmbeddingMatrix> out;
  for (std::size_t k = 0; k < ds.modalities.size(); ++k) {
    if (state.active[k]) {
      out.push_back(encode(state.encoders[k], ds.modalities[k]));
    } else {
      out.push_back({Matrix(ds.size(), state.encoders[k].spec.embedding_dim),
                     std::vector<bool>(ds.size(), false)});
    }
  }
  return out;
}

ClassPrototypes class_prototypes(std::span<const EmbeddingMatrix> embeddings,
                                 std::span<const std::size_t> active_modalities,
                                 std::span<const std::size_t> labels, std::size_t class_count,
                                 std::span<const std::string> modality_names) {
  ClassPrototypes p;
  p.class_count = class_count;
  p.modalities.assign(active_modalities.begin(), active_modalities.end());
  for (std::size_t m : active_modalities) {
    const auto& emb = embeddings[m];
    if (emb.instance_count() != labels.size()) {
      throw ShapeError("embedding rows do not match label count");
    }
    Matrix sums(class_count, emb.dim());
    std::vector<std::size_t> counts(class_count, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!emb.present[i]) continue;
      auto dst = sums.row(labels[i]);
      auto src = emb.rows.row(i);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < class_count; ++c) {
      if (counts[c] == 0) {
        const std::string name = m < modality_names.size() ? modality_names[m] : std::to_string(m);
        throw EvaluationError("no training instance of class " + std::to_string(c) +
                              " is present in modality " + name);
      }
    }
    try {
      p.prototypes.push_back(l2_normalize_rows(sums));
    } catch (const DegenerateError&) {
      throw EvaluationError("class mean embedding vanished in modality " + std::to_string(m));
    }
  }
  return p;
}

ClassPrototypes class_prototypes(const TrainState& state, const Dataset& train) {
  if (!train.has_labels()) throw EvaluationError("class prototypes need a labeled dataset");
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < state.active.size(); ++k)
    if (state.active[k]) active.push_back(k);
  const auto emb = embed_dataset(state, train);
  return class_prototypes(emb, active, train.labels, train.class_count, state.modality_names);
}

std::size_t classify(const ClassPrototypes& protos, std::span<const EmbeddingMatrix> embeddings,
                     std::size_t instance) {
  std::vector<std::size_t> blocks;
  double q_norm2 = 0.0;
  for (std::size_t b = 0; b < protos.modalities.size(); ++b) {
    const auto& emb = embeddings[protos.modalities[b]];
    if (!emb.present[instance]) continue;
    blocks.push_back(b);
    const auto q = emb.rows.row(instance);
    q_norm2 += dot(q, q);
  }
  if (blocks.empty()) {
    throw EvaluationError("instance " + std::to_string(instance) + " is absent in every active modality");
  }
  std::size_t best = 0;
  double best_score = -2.0;
  for (std::size_t c = 0; c < protos.class_count; ++c) {
    double num = 0.0;
    double p_norm2 = 0.0;
    for (std::size_t b : blocks) {
      const auto q = embeddings[protos.modalities[b]].rows.row(instance);
      const auto p = protos.get(c, b);
      num += dot(q, p);
      p_norm2 += dot(p, p);
    }
    const double score = num / std::sqrt(q_norm2 * p_norm2);
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

Metrics compute_metrics(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                        std::size_t class_count) {
  if (preds.size() != labels.size()) {
    throw ShapeError("compute_metrics: " + std::to_string(preds.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw DomainError("compute_metrics needs at least one prediction");
  if (class_count == 0) {
    class_count = 1 + std::max(*std::max_element(preds.begin(), preds.end()),
                               *std::max_element(labels.begin(), labels.end()));
  }
  Metrics m;
  m.total = preds.size();
  m.confusion.assign(class_count, std::vector<std::size_t>(class_count, 0));
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (preds[k] >= class_count || labels[k] >= class_count) {
      throw DomainError("class index outside [0, " + std::to_string(class_count) + ")");
    }
    ++m.confusion[labels[k]][preds[k]];
  }
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  for (std::size_t c = 0; c < class_count; ++c) {
    correct += m.confusion[c][c];
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t r = 0; r < class_count; ++r) {
      predicted += m.confusion[r][c];
      actual += m.confusion[c][r];
    }
    if (predicted > 0) precision += static_cast<double>(m.confusion[c][c]) / static_cast<double>(predicted);
    if (actual > 0) recall += static_cast<double>(m.confusion[c][c]) / static_cast<double>(actual);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  m.precision = precision / static_cast<double>(class_count);
  m.recall = recall / static_cast<double>(class_count);
  return m;
}

Evaluation evaluate(const TrainState& state, const Dataset& train, const Dataset& test) {
  if (!test.has_labels()) throw EvaluationError("evaluation needs a labeled test set");
  const ClassPrototypes protos = class_prototypes(state, train);
  const auto emb = embed_dataset(state, test);
  Evaluation ev;
  std::vector<std::size_t> truth;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const bool scorable = std::any_of(protos.modalities.begin(), protos.modalities.end(),
                                      [&](std::size_t m) { return emb[m].present[i]; });
    if (!scorable) {
      ++ev.unscored;
      continue;
    }
    ev.instances.push_back(i);
    ev.predictions.push_back(classify(protos, emb, i));
    truth.push_back(test.labels[i]);
  }
  if (ev.instances.empty()) throw EvaluationError("no test instance is present in an active modality");
  ev.metrics = compute_metrics(ev.predictions, truth, test.class_count);
  return ev;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_mean_std(const MeanStd& v, int decimals) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, v.mean, decimals, v.stddev);
  return buf;
}

}  // namespace modgraph
