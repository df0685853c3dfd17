#include "modgraph/graph.hpp"

#include <algorithm>
#include <numeric>

#include "modgraph/alignment.hpp"
#include "modgraph/error.hpp"

namespace modgraph {

EdgeWeights::EdgeWeights(std::size_t n_modalities)
    : n_(n_modalities),
      rho_(n_modalities, n_modalities),
      distance_(n_modalities, n_modalities),
      overlap_(n_modalities * n_modalities, 0),
      valid_(n_modalities * n_modalities, false) {}

EdgeWeights EdgeWeights::from_distances(const Matrix& distance) {
  if (distance.rows() != distance.cols()) {
    throw ShapeError("distance matrix must be square, got " + distance.shape_string());
  }
  EdgeWeights w(distance.rows());
  for (std::size_t i = 0; i < w.n_; ++i) {
    for (std::size_t j = i + 1; j < w.n_; ++j) {
      const double d = distance(i, j);
      if (!(d > 0.0)) throw DomainError("distances must be positive");
      for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        w.rho_(a, b) = 1.0 / d - 1.0 - kDistanceEpsilon;
        w.distance_(a, b) = d;
        w.overlap_[a * w.n_ + b] = 0;
        w.valid_[a * w.n_ + b] = true;
      }
    }
  }
  return w;
}

void EdgeWeights::set(std::size_t i, std::size_t j, double rho, std::size_t overlap, bool valid) {
  if (i >= n_ || j >= n_ || i == j) throw ShapeError("edge index out of range");
  const double d = valid ? distance_from_correlation(rho) : 0.0;
  for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
    rho_(a, b) = rho;
    distance_(a, b) = d;
    overlap_[a * n_ + b] = overlap;
    valid_[a * n_ + b] = valid;
  }
}

void EdgeWeights::invalidate(std::size_t i, std::size_t j) { set(i, j, 0.0, overlap(i, j), false); }

EdgeWeights estimate_edge_weights(std::span<const EmbeddingMatrix> embeddings,
                                  std::size_t min_overlap) {
  EdgeWeights w(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      const auto c = edge_correlation(embeddings[i], embeddings[j]);
      const bool ok = c.valid && c.overlap >= std::max<std::size_t>(min_overlap, 1);
      w.set(i, j, ok ? c.rho : 0.0, c.overlap, ok);
    }
  }
  return w;
}

EdgeWeights update_edge_weights(const EdgeWeights& prev, const EdgeWeights& observed, double beta) {
  if (prev.size() != observed.size()) {
    throw ShapeError("edge weight sizes differ: " + std::to_string(prev.size()) + " vs " +
                     std::to_string(observed.size()));
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("ema beta must lie in [0, 1]");
  EdgeWeights out(prev.size());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    for (std::size_t j = i + 1; j < prev.size(); ++j) {
      const bool p = prev.valid(i, j);
      const bool o = observed.valid(i, j);
      if (p && o) {
        const double rho = beta * prev.rho(i, j) + (1.0 - beta) * observed.rho(i, j);
        out.set(i, j, std::clamp(rho, -1.0, 1.0), observed.overlap(i, j), true);
      } else if (o) {
        out.set(i, j, observed.rho(i, j), observed.overlap(i, j), true);
      } else if (p) {
        out.set(i, j, prev.rho(i, j), observed.overlap(i, j), true);
      } else {
        out.set(i, j, 0.0, observed.overlap(i, j), false);
      }
    }
  }
  return out;
}

std::string to_string(GraphKind kind) {
  return kind == GraphKind::kFullyConnected ? "fcg" : "mst";
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "fcg") return GraphKind::kFullyConnected;
  if (name == "mst") return GraphKind::kMinimumSpanningTree;
  throw ConfigError("unknown graph kind '" + name + "' (expected fcg or mst)");
}

std::size_t ModalityGraph::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

std::size_t ModalityGraph::component_count() const {
  DisjointSets sets(active.size());
  for (const auto& e : edges) sets.unite(e.i, e.j);
  std::size_t inactive = active.size() - active_count();
  return sets.components() - inactive;
}

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
  std::size_t ra = find(a);
  std::size_t rb = find(b);
  if (ra == rb) return false;
  if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  if (rank_[ra] == rank_[rb]) ++rank_[ra];
  --components_;
  return true;
}

namespace {

void check_active(const EdgeWeights& weights, const std::vector<bool>& active) {
  if (active.size() != weights.size()) {
    throw ShapeError("active mask covers " + std::to_string(active.size()) + " modalities, weights " +
                     std::to_string(weights.size()));
  }
  if (std::count(active.begin(), active.end(), true) < 2) {
    throw GraphError("a modality graph needs at least 2 active modalities");
  }
}

std::vector<GraphEdge> candidate_edges(const EdgeWeights& weights, const std::vector<bool>& active) {
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!active[i]) continue;
    for (std::size_t j = i + 1; j < weights.size(); ++j) {
      if (active[j] && weights.valid(i, j)) {
        edges.push_back({i, j, weights.distance(i, j), weights.rho(i, j)});
      }
    }
  }
  return edges;
}

}  // namespace

ModalityGraph build_fcg(const EdgeWeights& weights, const std::vector<bool>& active) {
  check_active(weights, active);
  return {GraphKind::kFullyConnected, active, candidate_edges(weights, active)};
}

ModalityGraph build_fcg(const EdgeWeights& weights) {
  return build_fcg(weights, std::vector<bool>(weights.size(), true));
}

ModalityGraph kruskal_mst(const EdgeWeights& weights, const std::vector<bool>& active) {
  check_active(weights, active);
  auto edges = candidate_edges(weights, active);
  std::stable_sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  ModalityGraph g{GraphKind::kMinimumSpanningTree, active, {}};
  DisjointSets sets(weights.size());
  for (const auto& e : edges) {
    if (sets.unite(e.i, e.j)) g.edges.push_back(e);
  }
  return g;
}

ModalityGraph kruskal_mst(const EdgeWeights& weights) {
  return kruskal_mst(weights, std::vector<bool>(weights.size(), true));
}

std::vector<bool> prune_nodes(const EdgeWeights& weights, std::size_t prune_count,
                              const std::set<std::size_t>& protected_ids,
                              std::vector<bool> active) {
  if (active.size() != weights.size()) throw ShapeError("active mask does not match edge weights");
  const auto m = static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  if (prune_count == 0) return active;
  if (m < 2 || prune_count > m - 2) {
    throw ConfigError("prune_count " + std::to_string(prune_count) + " must be <= " +
                      std::to_string(m < 2 ? 0 : m - 2) + " (at least 2 modalities must survive)");
  }
  struct Score {
    std::size_t id;
    double sum;
  };
  std::vector<Score> scores;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!active[i] || protected_ids.contains(i)) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j)
      if (active[j] && weights.valid(i, j)) s += weights.rho(i, j);
    scores.push_back({i, s});
  }
  if (scores.size() < prune_count) {
    throw ConfigError("only " + std::to_string(scores.size()) +
                      " unprotected modalities available to prune " + std::to_string(prune_count));
  }
  std::sort(scores.begin(), scores.end(), [](const Score& a, const Score& b) {
    if (a.sum != b.sum) return a.sum < b.sum;
    return a.id > b.id;
  });
  for (std::size_t k = 0; k < prune_count; ++k) active[scores[k].id] = false;
  return active;
}

std::vector<bool> prune_nodes(const EdgeWeights& weights, std::size_t prune_count,
                              const std::set<std::size_t>& protected_ids) {
  return prune_nodes(weights, prune_count, protected_ids, std::vector<bool>(weights.size(), true));
}

double total_distance(std::vector<GraphEdge> edges) {
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  double total = 0.0;
  for (const auto& e : edges) total += e.distance;
  return total;
}

}  // namespace modgraph
