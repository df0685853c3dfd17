#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "modgraph/encoder.hpp"
#include "modgraph/matrix.hpp"

namespace modgraph {

/// Symmetric modality-by-modality correlation factors and their distances.
/// An edge with valid(i, j) == false is excluded from every graph.
class EdgeWeights {
 public:
  EdgeWeights() = default;
  explicit EdgeWeights(std::size_t n_modalities);

  /// Weights whose distances are given directly (rho = 1/d - 1 - ε, the
  /// inverse of distance_from_correlation). Every off-diagonal pair is valid.
  static EdgeWeights from_distances(const Matrix& distance);

  std::size_t size() const { return n_; }
  double rho(std::size_t i, std::size_t j) const { return rho_(i, j); }
  double distance(std::size_t i, std::size_t j) const { return distance_(i, j); }
  std::size_t overlap(std::size_t i, std::size_t j) const { return overlap_[i * n_ + j]; }
  bool valid(std::size_t i, std::size_t j) const { return i != j && valid_[i * n_ + j]; }

  /// Sets both (i, j) and (j, i); distance is derived from rho.
  void set(std::size_t i, std::size_t j, double rho, std::size_t overlap, bool valid);
  void invalidate(std::size_t i, std::size_t j);

  const Matrix& rho_matrix() const { return rho_; }
  const Matrix& distance_matrix() const { return distance_; }

 private:
  std::size_t n_ = 0;
  Matrix rho_;
  Matrix distance_;
  std::vector<std::size_t> overlap_;
  std::vector<bool> valid_;
};

/// Correlation factor for every modality pair. Pairs whose overlap is below
/// min_overlap are marked invalid.
EdgeWeights estimate_edge_weights(std::span<const EmbeddingMatrix> embeddings,
                                  std::size_t min_overlap);

/// EMA merge: rho = beta·prev + (1-beta)·observed where both are valid;
/// entries valid only in `observed` adopt it directly; entries valid only in
/// `prev` keep the previous estimate.
EdgeWeights update_edge_weights(const EdgeWeights& prev, const EdgeWeights& observed, double beta);

enum class GraphKind { kFullyConnected, kMinimumSpanningTree };

std::string to_string(GraphKind kind);
GraphKind parse_graph_kind(const std::string& name);

struct GraphEdge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double distance = 0.0;
  double rho = 0.0;

  bool operator==(const GraphEdge&) const = default;
};

struct ModalityGraph {
  GraphKind kind = GraphKind::kFullyConnected;
  std::vector<bool> active;
  /// FCG: lexicographic order. MST: Kruskal acceptance order.
  std::vector<GraphEdge> edges;

  std::size_t active_count() const;
  /// Connected components among active nodes under `edges`.
  std::size_t component_count() const;
};

/// Union-find with path compression and union by rank.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);

  std::size_t find(std::size_t x);
  /// Merges the sets of a and b; false when they were already joined.
  bool unite(std::size_t a, std::size_t b);
  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
  std::size_t components_ = 0;
};

ModalityGraph build_fcg(const EdgeWeights& weights, const std::vector<bool>& active);
ModalityGraph build_fcg(const EdgeWeights& weights);

/// Kruskal over valid edges between active nodes, sorted by distance
/// ascending with ties broken by (i, j). Yields a spanning forest when the
/// valid-edge graph is disconnected.
ModalityGraph kruskal_mst(const EdgeWeights& weights, const std::vector<bool>& active);
ModalityGraph kruskal_mst(const EdgeWeights& weights);

/// Deactivates the `prune_count` unprotected active nodes with the lowest sum
/// of rho over valid edges to other active nodes; on equal sums the higher
/// modality id goes first. At least two active nodes must remain.
std::vector<bool> prune_nodes(const EdgeWeights& weights, std::size_t prune_count,
                              const std::set<std::size_t>& protected_ids,
                              std::vector<bool> active);
std::vector<bool> prune_nodes(const EdgeWeights& weights, std::size_t prune_count,
                              const std::set<std::size_t>& protected_ids);

/// Sum of edge distances in lexicographic (i, j) order, so equal edge sets
/// always produce identical totals.
double total_distance(std::vector<GraphEdge> edges);

}  // namespace modgraph
