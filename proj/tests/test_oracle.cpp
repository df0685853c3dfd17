#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "modgraph/alignment.hpp"
#include "modgraph/error.hpp"
#include "modgraph/oracle.hpp"
#include "modgraph/random.hpp"
#include "modgraph/suites.hpp"

namespace modgraph {
namespace {

using Edges = std::vector<std::pair<std::size_t, std::size_t>>;

TEST(Prufer, DecodesKnownSequences) {
  // Sequence (3, 3, 3) on 5 labels is the star around 3 plus the leaf pair.
  const std::vector<std::size_t> star{3, 3, 3};
  EXPECT_EQ(oracle::prufer_decode(star, 5), (Edges{{0, 3}, {1, 3}, {2, 3}, {3, 4}}));
  // Sequence (1, 2) on 4 labels is the path 0-1-2-3.
  const std::vector<std::size_t> path{1, 2};
  EXPECT_EQ(oracle::prufer_decode(path, 4), (Edges{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_EQ(oracle::prufer_decode(std::vector<std::size_t>{}, 2), (Edges{{0, 1}}));
}

TEST(Enumeration, CayleyCounts) {
  for (std::size_t m = 2; m <= 7; ++m) {
    const auto e = oracle::enumerate_spanning_trees(EdgeWeights::from_distances(Matrix(m, m, 1.0)));
    std::size_t expected = 1;
    for (std::size_t k = 0; k + 2 < m; ++k) expected *= m;
    EXPECT_EQ(e.trees.size(), expected) << "m = " << m;
    // Every tree appears once.
    std::set<Edges> distinct;
    for (const auto& t : e.trees) {
      Edges edges;
      for (const auto& g : t.edges) edges.emplace_back(g.i, g.j);
      EXPECT_EQ(edges.size(), m - 1);
      distinct.insert(edges);
    }
    EXPECT_EQ(distinct.size(), expected);
  }
  EXPECT_EQ(oracle::enumerate_spanning_trees(EdgeWeights::from_distances(Matrix(3, 3, 1.0))).trees.size(), 3u);
  EXPECT_EQ(oracle::enumerate_spanning_trees(EdgeWeights::from_distances(Matrix(5, 5, 1.0))).trees.size(), 125u);
}

TEST(Enumeration, SizeLimits) {
  EXPECT_THROW(oracle::enumerate_spanning_trees(EdgeWeights::from_distances(Matrix(8, 8, 1.0))), SizeError);
  EXPECT_THROW(oracle::enumerate_spanning_trees(EdgeWeights::from_distances(Matrix(1, 1, 1.0))), SizeError);
}

TEST(Enumeration, MinimumMatchesKruskalForFiveNodes) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    Matrix d(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j) d(i, j) = d(j, i) = rng.uniform(0.01, 1.0);
    const EdgeWeights w = EdgeWeights::from_distances(d);
    const auto e = oracle::enumerate_spanning_trees(w);
    EXPECT_EQ(e.minimum.total, total_distance(kruskal_mst(w).edges));
    for (const auto& tree : e.trees) EXPECT_GE(tree.total, e.minimum.total);
  }
}

TEST(GradientCheck, Quadratic) {
  oracle::Differentiable f{[](std::span<const double> x) { return x[0] * x[0]; },
                           [](std::span<const double> x) { return std::vector<double>{2 * x[0]}; }};
  EXPECT_LT(oracle::gradient_check(f, {3.0}, 1e-5), 1e-8);
}

TEST(GradientCheck, StepRangeAndFiniteness) {
  oracle::Differentiable f{[](std::span<const double> x) { return x[0] * x[0]; },
                           [](std::span<const double> x) { return std::vector<double>{2 * x[0]}; }};
  EXPECT_THROW(oracle::gradient_check(f, {3.0}, 1e-1), DomainError);
  EXPECT_THROW(oracle::gradient_check(f, {3.0}, 1e-9), DomainError);
  oracle::Differentiable g{[](std::span<const double> x) { return std::log(x[0]); },
                           [](std::span<const double> x) { return std::vector<double>{1 / x[0]}; }};
  EXPECT_THROW(oracle::gradient_check(g, {1e-6}, 1e-5), DomainError);
}

oracle::EdgeLossProblem two_layer_problem(std::uint64_t seed) {
  Rng rng(seed);
  const auto pa = init_encoder(EncoderSpec{6, {5}, 4, Activation::kTanh}, derive_seed(seed, 1));
  const auto pb = init_encoder(EncoderSpec{3, {5}, 4, Activation::kTanh}, derive_seed(seed, 2));
  return oracle::edge_loss_problem(pa, pb, rng.uniform_matrix(8, 6, -2, 2), rng.uniform_matrix(8, 3, -2, 2), 0.5);
}

TEST(GradientCheck, EdgeLossThroughTwoLayerEncoders) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto problem = two_layer_problem(seed);
    EXPECT_LT(oracle::gradient_check(problem.objective, problem.point, 1e-5), 1e-4) << "seed " << seed;
  }
}

TEST(GradientCheck, LargerStepHasLargerTruncationError) {
  const auto problem = two_layer_problem(3);
  EXPECT_GT(oracle::gradient_check(problem.objective, problem.point, 1e-2),
            oracle::gradient_check(problem.objective, problem.point, 1e-5));
}

TEST(Flatten, RoundTrip) {
  const auto p = init_encoder(EncoderSpec{3, {4}, 2, Activation::kRelu}, 9);
  const auto flat = oracle::flatten(p);
  EXPECT_EQ(flat.size(), p.parameter_count());
  EncoderParams q = init_encoder(EncoderSpec{3, {4}, 2, Activation::kRelu}, 10);
  oracle::unflatten(flat, q);
  EXPECT_EQ(q, p);
}

TEST(Arrangement, IdenticalEmbeddingsTermCount) {
  Rng rng(2);
  const Matrix z = l2_normalize_rows(rng.uniform_matrix(6, 3, -1, 1));
  const std::vector<Matrix> emb(4, z);
  const auto gap = oracle::arrangement_loss_gap(emb, {0, 1}, {2, 3}, 0.1);
  PairBatch b;
  b.zi = z;
  b.zj = z;
  const double pair = contrastive_edge_loss(b, 0.1);
  EXPECT_NEAR(gap.grouped, 2 * pair, 1e-12);
  EXPECT_NEAR(gap.mixed, 6 * pair, 1e-12);
  EXPECT_LT(gap.grouped, gap.mixed);
}

TEST(Arrangement, PlantedFixtureSingleDraw) {
  const auto emb = oracle::planted_arrangement_fixture(16, 8, 0.1, 4);
  ASSERT_EQ(emb.size(), 6u);
  for (const auto& m : emb)
    for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_NEAR(norm(m.row(r)), 1.0, 1e-12);
  const auto gap = oracle::arrangement_loss_gap(emb, {0, 1, 2}, {3, 4, 5}, 0.1);
  EXPECT_LT(gap.grouped, gap.mixed);
}

TEST(Arrangement, HundredDrawsAndNaiveAgreement) {
  int wins = 0;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    const auto emb = oracle::planted_arrangement_fixture(16, 8, 0.1, 1000 + draw);
    const auto fast = oracle::arrangement_loss_gap(emb, {0, 1, 2}, {3, 4, 5}, 0.1);
    const auto slow = oracle::arrangement_loss_gap(emb, {0, 1, 2}, {3, 4, 5}, 0.1, true);
    EXPECT_NEAR(fast.grouped, slow.grouped, 1e-12);
    EXPECT_NEAR(fast.mixed, slow.mixed, 1e-12);
    if (fast.grouped < fast.mixed) ++wins;
  }
  EXPECT_GE(wins, 95);
}

TEST(Arrangement, OverlappingGroupsAreRejected) {
  const auto emb = oracle::planted_arrangement_fixture(4, 3, 0.1, 1);
  EXPECT_THROW(oracle::arrangement_loss_gap(emb, {0, 1, 2}, {2, 3}, 0.1), DomainError);
}

TEST(Suites, AllPass) {
  for (const auto& r : oracle::run_all_suites(7)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

}  // namespace
}  // namespace modgraph
