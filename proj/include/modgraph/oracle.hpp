#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <vector>

#include "modgraph/encoder.hpp"
#include "modgraph/graph.hpp"
#include "modgraph/matrix.hpp"

/// Brute-force reference computations used to check the fast paths at small
/// scale. Nothing here is used during training.
namespace modgraph::oracle {

struct SpanningTree {
  std::vector<GraphEdge> edges;  // sorted by (i, j)
  double total = 0.0;
};

struct TreeEnumeration {
  std::vector<SpanningTree> trees;
  SpanningTree minimum;
};

inline constexpr std::size_t kMaxEnumerationNodes = 7;

/// Decodes a Prüfer sequence over labels [0, m) into the m-1 edges of the
/// labeled tree it encodes, each with i < j.
std::vector<std::pair<std::size_t, std::size_t>> prufer_decode(std::span<const std::size_t> sequence,
                                                               std::size_t m);

/// Every spanning tree of the complete graph on the active nodes, via all
/// m^(m-2) Prüfer sequences; trees using an invalid edge are dropped. The
/// minimum is by total_distance, ties to the lexicographically smallest edge
/// list. Throws SizeError unless 2 <= m <= 7.
TreeEnumeration enumerate_spanning_trees(const EdgeWeights& weights, const std::vector<bool>& active);
TreeEnumeration enumerate_spanning_trees(const EdgeWeights& weights);

/// Symmetric batch contrastive loss written as a plain double loop with no
/// shared code path beyond std::exp/std::log.
double naive_contrastive_loss(const Matrix& zi, const Matrix& zj, double temperature);

struct LossGap {
  double grouped = 0.0;
  double mixed = 0.0;
};

/// grouped = Σ loss over pairs inside group_i plus pairs inside group_j;
/// mixed = Σ loss over all pairs in group_i ∪ group_j. `naive` selects the
/// double-loop loss instead of the tape implementation.
LossGap arrangement_loss_gap(std::span<const Matrix> embeddings, const std::set<std::size_t>& group_i,
                             const std::set<std::size_t>& group_j, double temperature,
                             bool naive = false);

/// Six embedding sets: 0-2 are jittered copies of a random unit-row set A,
/// 3-5 are jittered copies of B, a row permutation of A. Rows unit-norm.
std::vector<Matrix> planted_arrangement_fixture(std::size_t rows, std::size_t dim, double jitter,
                                                std::uint64_t seed);

struct Differentiable {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

/// Central differences per coordinate against the analytic gradient:
/// max_k |g_k - ĝ_k| / max(1e-8, |g_k| + |ĝ_k|). Throws DomainError for h
/// outside [1e-8, 1e-2] and if the loss is non-finite at a probed point.
double gradient_check(const Differentiable& f, std::vector<double> point, double h);

/// Edge loss through two encoders as a function of all their parameters
/// flattened (encoder a then encoder b). The value path uses the plain
/// forward pass and the double-loop loss; the gradient path uses the tape.
struct EdgeLossProblem {
  Differentiable objective;
  std::vector<double> point;
};

EdgeLossProblem edge_loss_problem(const EncoderParams& a, const EncoderParams& b, const Matrix& xa,
                                  const Matrix& xb, double temperature);

std::vector<double> flatten(const EncoderParams& params);
void unflatten(std::span<const double> flat, EncoderParams& params);

}  // namespace modgraph::oracle
