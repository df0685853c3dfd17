#include "modgraph/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modgraph/error.hpp"

namespace modgraph {

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine_sim length mismatch: " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (!(nu >= kMinNorm) || !(nv >= kMinNorm)) {
    throw DegenerateError("cosine_sim of a zero-length vector");
  }
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

std::vector<std::size_t> overlap_indices(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("presence masks cover " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " instances");
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] && b[k]) out.push_back(k);
  return out;
}

EdgeCorrelation edge_correlation(const EmbeddingMatrix& zi, const EmbeddingMatrix& zj) {
  const auto shared = overlap_indices(zi.present, zj.present);
  EdgeCorrelation out;
  out.overlap = shared.size();
  if (shared.empty()) return out;
  double total = 0.0;
  for (std::size_t k : shared) total += cosine_sim(zi.rows.row(k), zj.rows.row(k));
  out.rho = total / static_cast<double>(shared.size());
  out.valid = true;
  return out;
}

double distance_from_correlation(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw DomainError("correlation " + std::to_string(rho) + " outside [-1, 1]");
  }
  return 1.0 / (rho + 1.0 + kDistanceEpsilon);
}

PairBatch make_pair_batch(std::size_t i, std::size_t j, const EmbeddingMatrix& zi,
                          const EmbeddingMatrix& zj) {
  PairBatch b;
  b.modality_i = i;
  b.modality_j = j;
  b.instances = overlap_indices(zi.present, zj.present);
  b.zi = gather_rows(zi.rows, b.instances);
  b.zj = gather_rows(zj.rows, b.instances);
  return b;
}

namespace {

void check_loss_inputs(const Matrix& zi, const Matrix& zj, double temperature) {
  if (zi.rows() != zj.rows() || zi.cols() != zj.cols()) {
    throw ShapeError("pair batch sides differ: " + zi.shape_string() + " vs " + zj.shape_string());
  }
  if (zi.rows() < 2) {
    throw DomainError("contrastive loss needs at least 2 aligned rows, got " +
                      std::to_string(zi.rows()));
  }
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
}

}  // namespace

ad::Var contrastive_edge_loss(ad::Var zi, ad::Var zj, double temperature) {
  check_loss_inputs(zi.value(), zj.value(), temperature);
  std::vector<std::size_t> diagonal(zi.value().rows());
  std::iota(diagonal.begin(), diagonal.end(), std::size_t{0});
  ad::Var logits = ad::scale(ad::matmul_nt(zi, zj), 1.0 / temperature);
  ad::Var forward = ad::cross_entropy_rows(logits, diagonal);
  ad::Var reverse = ad::cross_entropy_rows(ad::transpose(logits), diagonal);
  return ad::scale(ad::add(forward, reverse), 0.5);
}

double contrastive_edge_loss(const PairBatch& batch, double temperature) {
  ad::Tape tape;
  ad::Var zi = tape.constant(batch.zi);
  ad::Var zj = tape.constant(batch.zj);
  return contrastive_edge_loss(zi, zj, temperature).value()(0, 0);
}

}  // namespace modgraph
