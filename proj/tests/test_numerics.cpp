#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "modgraph/error.hpp"
#include "modgraph/matrix.hpp"
#include "modgraph/random.hpp"
#include "modgraph/tape.hpp"

namespace modgraph {
namespace {

using ad::Tape;
using ad::Var;

TEST(Matrix, IdentityTimesMatrixIsMatrix) {
  const Matrix m{{1.5, -2.0}, {0.25, 7.0}};
  EXPECT_EQ(matmul(Matrix::identity(2), m), m);
}

TEST(Matrix, MatmulHandExample) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{5, 6}, {7, 8}};
  const Matrix expected{{19, 22}, {43, 50}};
  EXPECT_EQ(matmul(a, b), expected);
}

TEST(Matrix, ZeroAnnihilates) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(matmul(Matrix(4, 2), m), Matrix(4, 3));
}

TEST(Matrix, MatmulShapeErrorNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matrix, TransposedProductsAgreeWithExplicitTranspose) {
  Rng rng(3);
  const Matrix a = rng.uniform_matrix(4, 3, -2, 2);
  const Matrix b = rng.uniform_matrix(5, 3, -2, 2);
  EXPECT_LT(max_abs_diff(matmul_nt(a, b), matmul(a, transpose(b))), 1e-14);
  const Matrix c = rng.uniform_matrix(4, 2, -2, 2);
  EXPECT_LT(max_abs_diff(matmul_tn(a, c), matmul(transpose(a), c)), 1e-14);
}

TEST(Matrix, MatmulAssociativity) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + rng.index(6), q = 1 + rng.index(6), r = 1 + rng.index(6), s = 1 + rng.index(6);
    const Matrix a = rng.uniform_matrix(p, q, -2, 2);
    const Matrix b = rng.uniform_matrix(q, r, -2, 2);
    const Matrix c = rng.uniform_matrix(r, s, -2, 2);
    EXPECT_LT(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-9);
  }
}

TEST(Matrix, NormalizeHandExample) {
  const Matrix out = l2_normalize_rows(Matrix{{3, 4}});
  EXPECT_NEAR(out(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.8, 1e-15);
}

TEST(Matrix, NormalizeUnitRowIsFixedPoint) {
  const Matrix unit{{1, 0, 0}};
  EXPECT_EQ(l2_normalize_rows(unit), unit);
}

TEST(Matrix, NormalizeZeroRowThrowsWithIndex) {
  try {
    l2_normalize_rows(Matrix{{1, 1}, {0, 0}});
    FAIL() << "expected DegenerateError";
  } catch (const DegenerateError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(Matrix, NormalizedRowsHaveUnitNorm) {
  Rng rng(5);
  const Matrix out = l2_normalize_rows(rng.uniform_matrix(200, 7, -2, 2));
  for (std::size_t r = 0; r < out.rows(); ++r) EXPECT_NEAR(norm(out.row(r)), 1.0, 1e-9);
}

TEST(Random, SameSeedSameMatrix) {
  Rng a(42), b(42), c(43);
  const Matrix ma = a.normal_matrix(6, 6);
  EXPECT_EQ(ma, b.normal_matrix(6, 6));
  EXPECT_NE(ma, c.normal_matrix(6, 6));
}

TEST(Random, DerivedSeedsDiffer) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

TEST(Tape, SquareGradient) {
  Tape tape;
  Var x = tape.parameter(Matrix{{3.0}});
  tape.backward(ad::hadamard(x, x));
  EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 6.0);
}

TEST(Tape, SumGradientIsOnes) {
  Tape tape;
  Var m = tape.parameter(Matrix{{1, 2, 3}, {4, 5, 6}});
  tape.backward(ad::sum(m));
  EXPECT_EQ(tape.grad(m), Matrix(2, 3, 1.0));
}

TEST(Tape, NonScalarLossIsRejected) {
  Tape tape;
  Var m = tape.parameter(Matrix(2, 2, 1.0));
  EXPECT_THROW(tape.backward(m), ShapeError);
}

TEST(Tape, DoubleBackwardWithoutResetIsStateError) {
  Tape tape;
  Var x = tape.parameter(Matrix{{2.0}});
  Var loss = ad::sum(x);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), StateError);
  tape.reset();
  Var y = tape.parameter(Matrix{{2.0}});
  EXPECT_NO_THROW(tape.backward(ad::sum(y)));
}

TEST(Tape, ConstantsReceiveNoGradient) {
  Tape tape;
  Var c = tape.constant(Matrix{{2.0}});
  Var x = tape.parameter(Matrix{{5.0}});
  tape.backward(ad::sum(ad::hadamard(c, x)));
  EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 2.0);
}

// Central differences of L(x) = Σ W ⊙ f(x) against the tape gradient, with a
// random weighting W so every output entry contributes.
using UnaryOp = std::function<Var(Tape&, Var)>;

double max_rel_error(const Matrix& x0, const UnaryOp& op, std::uint64_t seed) {
  Matrix weight;
  {
    Tape probe;
    const Matrix shape = op(probe, probe.constant(x0)).value();
    Rng rng(seed);
    weight = rng.uniform_matrix(shape.rows(), shape.cols(), -1, 1);
  }
  auto value = [&](const Matrix& x) {
    Tape t;
    const Matrix y = op(t, t.constant(x)).value();
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += weight.data()[k] * y.data()[k];
    return s;
  };
  Tape tape;
  Var x = tape.parameter(x0);
  tape.backward(ad::sum(ad::hadamard(op(tape, x), tape.constant(weight))));
  const Matrix g = tape.grad(x);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < x0.size(); ++k) {
    Matrix plus = x0, minus = x0;
    plus.data()[k] += h;
    minus.data()[k] -= h;
    const double fd = (value(plus) - value(minus)) / (2 * h);
    const double an = g.data()[k];
    worst = std::max(worst, std::abs(an - fd) / std::max(1e-8, std::abs(an) + std::abs(fd)));
  }
  return worst;
}

class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  Rng rng(100 + GetParam());
  const Matrix x = rng.uniform_matrix(4, 3, -2, 2);
  const Matrix other = rng.uniform_matrix(3, 5, -2, 2);
  const Matrix same = rng.uniform_matrix(4, 3, -2, 2);
  const Matrix wide = rng.uniform_matrix(6, 3, -2, 2);
  const Matrix bias = rng.uniform_matrix(1, 3, -2, 2);
  const Matrix left = rng.uniform_matrix(6, 4, -2, 2);
  const std::vector<std::size_t> targets{0, 2, 1, 1};

  const std::vector<std::pair<const char*, UnaryOp>> ops = {
      {"matmul lhs", [&](Tape& t, Var v) { return ad::matmul(v, t.constant(other)); }},
      {"matmul rhs", [&](Tape& t, Var v) { return ad::matmul(t.constant(left), v); }},
      {"matmul_nt lhs", [&](Tape& t, Var v) { return ad::matmul_nt(v, t.constant(wide)); }},
      {"matmul_nt rhs", [&](Tape& t, Var v) { return ad::matmul_nt(t.constant(wide), v); }},
      {"transpose", [&](Tape&, Var v) { return ad::transpose(v); }},
      {"bias rows", [&](Tape& t, Var v) { return ad::add_row_bias(v, t.constant(bias)); }},
      {"bias", [&](Tape& t, Var v) { return ad::add_row_bias(t.constant(left), ad::transpose(ad::matmul_nt(v, t.constant(Matrix(1, 3, 0.5))))); }},
      {"tanh", [&](Tape&, Var v) { return ad::tanh(v); }},
      {"normalize", [&](Tape&, Var v) { return ad::l2_normalize_rows(v); }},
      {"scale", [&](Tape&, Var v) { return ad::scale(v, -1.7); }},
      {"add", [&](Tape& t, Var v) { return ad::add(v, ad::hadamard(v, t.constant(same))); }},
      {"hadamard", [&](Tape& t, Var v) { return ad::hadamard(v, t.constant(same)); }},
      {"sum", [&](Tape&, Var v) { return ad::sum(v); }},
      {"cross entropy", [&](Tape&, Var v) { return ad::cross_entropy_rows(v, targets); }},
  };
  for (const auto& [name, op] : ops) {
    EXPECT_LT(max_rel_error(x, op, 7 + GetParam()), 1e-4) << name;
  }
}

INSTANTIATE_TEST_SUITE_P(RandomInputs, OpGradient, ::testing::Range(0, 5));

TEST(Tape, ReluGradientAwayFromKink) {
  // Entries kept at least 0.1 from zero so central differences never straddle the kink.
  const Matrix x{{0.5, -0.3, 1.2}, {-1.1, 0.2, -0.4}};
  EXPECT_LT(max_rel_error(x, [](Tape&, Var v) { return ad::relu(v); }, 1), 1e-4);
}

TEST(Tape, CrossEntropyOfUniformLogitsIsLogWidth) {
  Tape tape;
  const std::vector<std::size_t> targets{0, 3};
  Var loss = ad::cross_entropy_rows(tape.constant(Matrix(2, 4, 0.7)), targets);
  EXPECT_NEAR(loss.value()(0, 0), std::log(4.0), 1e-15);
}

}  // namespace
}  // namespace modgraph
