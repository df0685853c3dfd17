#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "modgraph/encoder.hpp"
#include "modgraph/matrix.hpp"
#include "modgraph/tape.hpp"

namespace modgraph {

/// Cosine similarity clamped to [-1, 1]. Throws DegenerateError when either
/// norm is below 1e-12.
double cosine_sim(std::span<const double> u, std::span<const double> v);

struct EdgeCorrelation {
  double rho = 0.0;
  std::size_t overlap = 0;
  /// False when no instance is present in both modalities; rho is then 0.
  bool valid = false;
};

/// Mean cosine similarity of aligned rows over instances present in both.
EdgeCorrelation edge_correlation(const EmbeddingMatrix& zi, const EmbeddingMatrix& zj);

inline constexpr double kDistanceEpsilon = 1e-6;

/// d = 1 / (rho + 1 + 1e-6). Strictly decreasing in rho, so edge order under
/// d is the reverse of edge order under rho.
double distance_from_correlation(double rho);

/// Aligned embedding rows of two modalities restricted to instances present
/// in both. Rows are expected to be unit-norm, so cosine is a dot product.
struct PairBatch {
  std::size_t modality_i = 0;
  std::size_t modality_j = 0;
  Matrix zi;
  Matrix zj;
  std::vector<std::size_t> instances;

  std::size_t size() const { return zi.rows(); }
};

PairBatch make_pair_batch(std::size_t i, std::size_t j, const EmbeddingMatrix& zi,
                          const EmbeddingMatrix& zj);

/// Instance positions present in both masks, ascending.
std::vector<std::size_t> overlap_indices(const std::vector<bool>& a, const std::vector<bool>& b);

/// Symmetric InfoNCE over a batch: S = Zi·Zjᵀ / τ, cross-entropy towards the
/// diagonal along rows (i→j) and columns (j→i), averaged. Off-diagonal
/// entries act as the negatives.
double contrastive_edge_loss(const PairBatch& batch, double temperature);

/// Differentiable form used in training; zi and zj share a tape.
ad::Var contrastive_edge_loss(ad::Var zi, ad::Var zj, double temperature);

}  // namespace modgraph
