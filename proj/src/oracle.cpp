#include "modgraph/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "modgraph/alignment.hpp"
#include "modgraph/error.hpp"
#include "modgraph/random.hpp"
#include "modgraph/tape.hpp"

namespace modgraph::oracle {

std::vector<std::pair<std::size_t, std::size_t>> prufer_decode(std::span<const std::size_t> sequence,
                                                               std::size_t m) {
  if (m < 2 || sequence.size() != m - 2) throw DomainError("Prüfer sequence length must be m - 2");
  std::vector<std::size_t> degree(m, 1);
  for (std::size_t v : sequence) {
    if (v >= m) throw DomainError("Prüfer label out of range");
    ++degree[v];
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t v : sequence) {
    std::size_t leaf = 0;
    while (degree[leaf] != 1) ++leaf;
    edges.emplace_back(std::min(leaf, v), std::max(leaf, v));
    --degree[leaf];
    --degree[v];
  }
  std::size_t u = m;
  for (std::size_t k = 0; k < m; ++k) {
    if (degree[k] != 1) continue;
    if (u == m) {
      u = k;
    } else {
      edges.emplace_back(u, k);
      break;
    }
  }
  return edges;
}

TreeEnumeration enumerate_spanning_trees(const EdgeWeights& weights, const std::vector<bool>& active) {
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < active.size(); ++k)
    if (active[k]) nodes.push_back(k);
  const std::size_t m = nodes.size();
  if (m < 2 || m > kMaxEnumerationNodes) {
    throw SizeError("spanning tree enumeration supports 2..7 active nodes, got " + std::to_string(m));
  }
  TreeEnumeration out;
  std::vector<std::size_t> seq(m - 2, 0);
  bool have_min = false;
  while (true) {
    SpanningTree tree;
    bool ok = true;
    for (auto [a, b] : prufer_decode(seq, m)) {
      const std::size_t i = nodes[a];
      const std::size_t j = nodes[b];
      if (!weights.valid(i, j)) {
        ok = false;
        break;
      }
      tree.edges.push_back({i, j, weights.distance(i, j), weights.rho(i, j)});
    }
    if (ok) {
      std::sort(tree.edges.begin(), tree.edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
        return std::tie(x.i, x.j) < std::tie(y.i, y.j);
      });
      tree.total = total_distance(tree.edges);
      const auto key = [](const SpanningTree& t) {
        std::vector<std::pair<std::size_t, std::size_t>> k;
        for (const auto& e : t.edges) k.emplace_back(e.i, e.j);
        return k;
      };
      if (!have_min || tree.total < out.minimum.total ||
          (tree.total == out.minimum.total && key(tree) < key(out.minimum))) {
        out.minimum = tree;
        have_min = true;
      }
      out.trees.push_back(std::move(tree));
    }
    // Odometer increment over [0, m)^(m-2).
    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == m) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return out;
}

TreeEnumeration enumerate_spanning_trees(const EdgeWeights& weights) {
  return enumerate_spanning_trees(weights, std::vector<bool>(weights.size(), true));
}

double naive_contrastive_loss(const Matrix& zi, const Matrix& zj, double temperature) {
  const std::size_t b = zi.rows();
  const std::size_t d = zi.cols();
  auto sim = [&](std::size_t r, std::size_t c) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += zi(r, k) * zj(c, k);
    return s / temperature;
  };
  double forward = 0.0;
  double reverse = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    double row_max = -1e300;
    double col_max = -1e300;
    for (std::size_t c = 0; c < b; ++c) {
      row_max = std::max(row_max, sim(r, c));
      col_max = std::max(col_max, sim(c, r));
    }
    double row_sum = 0.0;
    double col_sum = 0.0;
    for (std::size_t c = 0; c < b; ++c) {
      row_sum += std::exp(sim(r, c) - row_max);
      col_sum += std::exp(sim(c, r) - col_max);
    }
    forward += -(sim(r, r) - row_max - std::log(row_sum));
    reverse += -(sim(r, r) - col_max - std::log(col_sum));
  }
  return 0.5 * (forward / static_cast<double>(b) + reverse / static_cast<double>(b));
}

LossGap arrangement_loss_gap(std::span<const Matrix> embeddings, const std::set<std::size_t>& group_i,
                             const std::set<std::size_t>& group_j, double temperature, bool naive) {
  for (std::size_t k : group_i) {
    if (group_j.contains(k)) throw DomainError("arrangement groups overlap at modality " + std::to_string(k));
  }
  if (group_i.size() < 2 || group_j.size() < 2) throw DomainError("each group needs at least 2 modalities");
  for (std::size_t k : group_i)
    if (k >= embeddings.size()) throw DomainError("group member out of range");
  for (std::size_t k : group_j)
    if (k >= embeddings.size()) throw DomainError("group member out of range");

  auto pair_loss = [&](std::size_t a, std::size_t b) {
    if (naive) return naive_contrastive_loss(embeddings[a], embeddings[b], temperature);
    PairBatch batch{a, b, embeddings[a], embeddings[b], {}};
    return contrastive_edge_loss(batch, temperature);
  };
  auto within = [&](const std::set<std::size_t>& g) {
    const std::vector<std::size_t> v(g.begin(), g.end());
    double s = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x)
      for (std::size_t y = x + 1; y < v.size(); ++y) s += pair_loss(v[x], v[y]);
    return s;
  };
  std::set<std::size_t> both = group_i;
  both.insert(group_j.begin(), group_j.end());
  return {within(group_i) + within(group_j), within(both)};
}

std::vector<Matrix> planted_arrangement_fixture(std::size_t rows, std::size_t dim, double jitter,
                                                std::uint64_t seed) {
  Rng rng(seed);
  const Matrix a = l2_normalize_rows(rng.normal_matrix(rows, dim));
  std::vector<std::size_t> perm(rows);
  for (std::size_t k = 0; k < rows; ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  const Matrix b = gather_rows(a, perm);
  std::vector<Matrix> out;
  for (const Matrix* base : {&a, &a, &a, &b, &b, &b}) {
    Matrix m = *base;
    for (double& v : m.data()) v += jitter * rng.normal();
    out.push_back(l2_normalize_rows(m));
  }
  return out;
}

double gradient_check(const Differentiable& f, std::vector<double> point, double h) {
  if (!(h >= 1e-8 && h <= 1e-2)) throw DomainError("finite-difference step must lie in [1e-8, 1e-2]");
  const std::vector<double> analytic = f.gradient(point);
  if (analytic.size() != point.size()) throw ShapeError("gradient length does not match point");
  double worst = 0.0;
  for (std::size_t k = 0; k < point.size(); ++k) {
    const double saved = point[k];
    point[k] = saved + h;
    const double up = f.value(point);
    point[k] = saved - h;
    const double down = f.value(point);
    point[k] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw DomainError("loss is not finite at a perturbed point (coordinate " + std::to_string(k) + ")");
    }
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[k] - numeric) /
                       std::max(1e-8, std::abs(analytic[k]) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

std::vector<double> flatten(const EncoderParams& params) {
  std::vector<double> out;
  for (const auto& l : params.layers) {
    out.insert(out.end(), l.weight.data().begin(), l.weight.data().end());
    out.insert(out.end(), l.bias.data().begin(), l.bias.data().end());
  }
  return out;
}

void unflatten(std::span<const double> flat, EncoderParams& params) {
  std::size_t pos = 0;
  for (auto& l : params.layers) {
    for (Matrix* m : {&l.weight, &l.bias}) {
      if (pos + m->size() > flat.size()) throw ShapeError("flat parameter vector too short");
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                flat.begin() + static_cast<std::ptrdiff_t>(pos + m->size()), m->data().begin());
      pos += m->size();
    }
  }
  if (pos != flat.size()) throw ShapeError("flat parameter vector too long");
}

EdgeLossProblem edge_loss_problem(const EncoderParams& a, const EncoderParams& b, const Matrix& xa,
                                  const Matrix& xb, double temperature) {
  const std::size_t na = a.parameter_count();
  auto split_params = [a, b, na](std::span<const double> flat) {
    EncoderParams pa = a;
    EncoderParams pb = b;
    unflatten(flat.subspan(0, na), pa);
    unflatten(flat.subspan(na), pb);
    return std::pair{pa, pb};
  };
  EdgeLossProblem problem;
  problem.point = flatten(a);
  const auto fb = flatten(b);
  problem.point.insert(problem.point.end(), fb.begin(), fb.end());
  problem.objective.value = [=](std::span<const double> flat) {
    auto [pa, pb] = split_params(flat);
    return naive_contrastive_loss(encode_rows(pa, xa), encode_rows(pb, xb), temperature);
  };
  problem.objective.gradient = [=](std::span<const double> flat) {
    auto [pa, pb] = split_params(flat);
    ad::Tape tape;
    const BoundEncoder ea = bind_encoder(tape, pa);
    const BoundEncoder eb = bind_encoder(tape, pb);
    ad::Var za = encode_on_tape(ea, tape.constant(xa));
    ad::Var zb = encode_on_tape(eb, tape.constant(xb));
    tape.backward(contrastive_edge_loss(za, zb, temperature));
    std::vector<double> g;
    for (const auto* enc : {&ea, &eb}) {
      for (const auto& v : enc->vars) {
        const auto& d = tape.grad(v).data();
        g.insert(g.end(), d.begin(), d.end());
      }
    }
    return g;
  };
  return problem;
}

}  // namespace modgraph::oracle
