#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "modgraph/matrix.hpp"

/// Reverse-mode automatic differentiation over dense matrices.
///
/// A Tape records every operation in creation order, so node indices are a
/// topological order of the dependency graph. backward() walks the nodes in
/// reverse and each node's adjoint is complete before it is propagated to its
/// inputs. One training step owns one tape; a tape is not thread-safe.
namespace modgraph::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid until the tape is reset.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

enum class Op {
  kLeaf,
  kMatmul,
  kMatmulNT,
  kTranspose,
  kAddRowBias,
  kTanh,
  kRelu,
  kNormalizeRows,
  kScale,
  kAdd,
  kHadamard,
  kSum,
  kCrossEntropyRows,
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Parameter leaf; its gradient is available after backward().
  Var parameter(Matrix value);
  /// Input leaf; no gradient is tracked through it.
  Var constant(Matrix value);

  /// Populates adjoints for every node reachable from `loss`. The loss must
  /// be 1×1. A second call without reset() is an error.
  void backward(Var loss);

  /// Gradient of the last backward() loss with respect to `v`.
  const Matrix& grad(Var v) const;

  void reset();
  std::size_t node_count() const { return nodes_.size(); }

  struct Node {
    Op op = Op::kLeaf;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    bool needs_grad = false;
    Matrix value;
    Matrix adjoint;
    // Op-specific cache: row norms (normalize), softmax (cross-entropy).
    Matrix cache;
    double scalar = 0.0;
    std::vector<std::size_t> targets;
  };

 private:
  friend class Var;
  friend Var matmul(Var, Var);
  friend Var matmul_nt(Var, Var);
  friend Var transpose(Var);
  friend Var add_row_bias(Var, Var);
  friend Var tanh(Var);
  friend Var relu(Var);
  friend Var l2_normalize_rows(Var);
  friend Var scale(Var, double);
  friend Var add(Var, Var);
  friend Var hadamard(Var, Var);
  friend Var sum(Var);
  friend Var cross_entropy_rows(Var, std::span<const std::size_t>);

  Var push(Node node);
  const Node& node(Var v) const;
  void accumulate(std::size_t id, const Matrix& delta);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add_row_bias(Var m, Var bias);
Var tanh(Var a);
Var relu(Var a);
/// Throws DegenerateError for rows with norm below 1e-12.
Var l2_normalize_rows(Var a);
Var scale(Var a, double factor);
Var add(Var a, Var b);
Var hadamard(Var a, Var b);
/// Sum of all entries as a 1×1 node.
Var sum(Var a);
/// Mean over rows of -log softmax(row)[target]; 1×1. Uses max-subtraction.
Var cross_entropy_rows(Var logits, std::span<const std::size_t> targets);

}  // namespace modgraph::ad
