#include "modgraph/tape.hpp"

#include <algorithm>
#include <cmath>

#include "modgraph/error.hpp"

namespace modgraph::ad {

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw StateError("operands belong to different tapes");
  }
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw StateError("variable is not attached to a tape");
  return *a.tape();
}

}  // namespace

const Matrix& Var::value() const { return tape_->node(*this).value; }

Var Tape::push(Node node) {
  if (backward_done_) throw StateError("cannot record on a tape after backward(); call reset()");
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw StateError("stale or foreign variable");
  return nodes_[v.id_];
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

const Matrix& Tape::grad(Var v) const {
  if (!backward_done_) throw StateError("grad() requested before backward()");
  const Node& n = node(v);
  if (!n.needs_grad) throw StateError("variable does not track gradients");
  return n.adjoint;
}

void Tape::accumulate(std::size_t id, const Matrix& delta) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.adjoint.empty()) {
    n.adjoint = delta;
    return;
  }
  auto& a = n.adjoint.data();
  const auto& d = delta.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += d[i];
}

void Tape::backward(Var loss) {
  if (backward_done_) throw StateError("backward() already ran on this tape; call reset() first");
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " + root.value.shape_string());
  }
  backward_done_ = true;
  for (auto& n : nodes_) {
    if (n.needs_grad) n.adjoint = Matrix(n.value.rows(), n.value.cols());
  }
  if (!nodes_[loss.id_].needs_grad) return;
  nodes_[loss.id_].adjoint(0, 0) = 1.0;

  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.op == Op::kLeaf) continue;
    const Matrix& g = n.adjoint;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatmul: {
        const Matrix& a = nodes_[n.lhs].value;
        const Matrix& b = nodes_[n.rhs].value;
        if (nodes_[n.lhs].needs_grad) accumulate(n.lhs, matmul_nt(g, b));
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, matmul_tn(a, g));
        break;
      }
      case Op::kMatmulNT: {
        // C = A Bᵀ: dA = G B, dB = Gᵀ A
        const Matrix& a = nodes_[n.lhs].value;
        const Matrix& b = nodes_[n.rhs].value;
        if (nodes_[n.lhs].needs_grad) accumulate(n.lhs, modgraph::matmul(g, b));
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, matmul_tn(g, a));
        break;
      }
      case Op::kTranspose:
        accumulate(n.lhs, modgraph::transpose(g));
        break;
      case Op::kAddRowBias: {
        accumulate(n.lhs, g);
        if (nodes_[n.rhs].needs_grad) {
          Matrix db(1, g.cols());
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
          accumulate(n.rhs, db);
        }
        break;
      }
      case Op::kTanh: {
        Matrix d = g;
        for (std::size_t i = 0; i < d.size(); ++i) {
          const double y = n.value.data()[i];
          d.data()[i] *= 1.0 - y * y;
        }
        accumulate(n.lhs, d);
        break;
      }
      case Op::kRelu: {
        Matrix d = g;
        const auto& x = nodes_[n.lhs].value.data();
        for (std::size_t i = 0; i < d.size(); ++i)
          if (x[i] <= 0.0) d.data()[i] = 0.0;
        accumulate(n.lhs, d);
        break;
      }
      case Op::kNormalizeRows: {
        // y = x/|x|  =>  dx = (dy - y (y·dy)) / |x|
        Matrix d(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i) {
          auto y = n.value.row(i);
          auto gy = g.row(i);
          const double proj = dot(y, gy);
          const double inv = 1.0 / n.cache(i, 0);
          auto dr = d.row(i);
          for (std::size_t j = 0; j < dr.size(); ++j) dr[j] = (gy[j] - y[j] * proj) * inv;
        }
        accumulate(n.lhs, d);
        break;
      }
      case Op::kScale: {
        Matrix d = g;
        for (double& v : d.data()) v *= n.scalar;
        accumulate(n.lhs, d);
        break;
      }
      case Op::kAdd:
        accumulate(n.lhs, g);
        accumulate(n.rhs, g);
        break;
      case Op::kHadamard: {
        const Matrix& a = nodes_[n.lhs].value;
        const Matrix& b = nodes_[n.rhs].value;
        if (nodes_[n.lhs].needs_grad) {
          Matrix d = g;
          for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] *= b.data()[i];
          accumulate(n.lhs, d);
        }
        if (nodes_[n.rhs].needs_grad) {
          Matrix d = g;
          for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] *= a.data()[i];
          accumulate(n.rhs, d);
        }
        break;
      }
      case Op::kSum: {
        const Matrix& x = nodes_[n.lhs].value;
        accumulate(n.lhs, Matrix(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::kCrossEntropyRows: {
        // d/dlogits = (softmax - onehot) / B
        Matrix d = n.cache;
        const double inv_b = g(0, 0) / static_cast<double>(d.rows());
        for (std::size_t i = 0; i < d.rows(); ++i) {
          d(i, n.targets[i]) -= 1.0;
          for (double& v : d.row(i)) v *= inv_b;
        }
        accumulate(n.lhs, d);
        break;
      }
    }
  }
}

namespace {

Tape::Node make_node(Op op, Matrix value, bool needs_grad) {
  Tape::Node n;
  n.op = op;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return n;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  auto n = make_node(Op::kMatmul, modgraph::matmul(a.value(), b.value()),
                     t.node(a).needs_grad || t.node(b).needs_grad);
  n.lhs = a.id();
  n.rhs = b.id();
  return t.push(std::move(n));
}

Var matmul_nt(Var a, Var b) {
  Tape& t = same_tape(a, b);
  auto n = make_node(Op::kMatmulNT, modgraph::matmul_nt(a.value(), b.value()),
                     t.node(a).needs_grad || t.node(b).needs_grad);
  n.lhs = a.id();
  n.rhs = b.id();
  return t.push(std::move(n));
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  auto n = make_node(Op::kTranspose, modgraph::transpose(a.value()), t.node(a).needs_grad);
  n.lhs = a.id();
  return t.push(std::move(n));
}

Var add_row_bias(Var m, Var bias) {
  Tape& t = same_tape(m, bias);
  auto n = make_node(Op::kAddRowBias, modgraph::add_row_bias(m.value(), bias.value()),
                     t.node(m).needs_grad || t.node(bias).needs_grad);
  n.lhs = m.id();
  n.rhs = bias.id();
  return t.push(std::move(n));
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  Matrix v = a.value();
  for (double& x : v.data()) x = std::tanh(x);
  auto n = make_node(Op::kTanh, std::move(v), t.node(a).needs_grad);
  n.lhs = a.id();
  return t.push(std::move(n));
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Matrix v = a.value();
  for (double& x : v.data()) x = std::max(x, 0.0);
  auto n = make_node(Op::kRelu, std::move(v), t.node(a).needs_grad);
  n.lhs = a.id();
  return t.push(std::move(n));
}

Var l2_normalize_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  Matrix norms(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) norms(i, 0) = norm(x.row(i));
  auto n = make_node(Op::kNormalizeRows, modgraph::l2_normalize_rows(x), t.node(a).needs_grad);
  n.cache = std::move(norms);
  n.lhs = a.id();
  return t.push(std::move(n));
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  Matrix v = a.value();
  for (double& x : v.data()) x *= factor;
  auto n = make_node(Op::kScale, std::move(v), t.node(a).needs_grad);
  n.scalar = factor;
  n.lhs = a.id();
  return t.push(std::move(n));
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError("add shape mismatch: " + x.shape_string() + " vs " + y.shape_string());
  }
  Matrix v = x;
  for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] += y.data()[i];
  auto n = make_node(Op::kAdd, std::move(v), t.node(a).needs_grad || t.node(b).needs_grad);
  n.lhs = a.id();
  n.rhs = b.id();
  return t.push(std::move(n));
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError("hadamard shape mismatch: " + x.shape_string() + " vs " + y.shape_string());
  }
  Matrix v = x;
  for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] *= y.data()[i];
  auto n = make_node(Op::kHadamard, std::move(v), t.node(a).needs_grad || t.node(b).needs_grad);
  n.lhs = a.id();
  n.rhs = b.id();
  return t.push(std::move(n));
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  auto n = make_node(Op::kSum, Matrix(1, 1, s), t.node(a).needs_grad);
  n.lhs = a.id();
  return t.push(std::move(n));
}

Var cross_entropy_rows(Var logits, std::span<const std::size_t> targets) {
  Tape& t = tape_of(logits);
  const Matrix& z = logits.value();
  if (targets.size() != z.rows() || z.rows() == 0) {
    throw ShapeError("cross_entropy_rows: " + std::to_string(targets.size()) +
                     " targets for logits " + z.shape_string());
  }
  Matrix softmax(z.rows(), z.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (targets[i] >= z.cols()) throw DomainError("cross_entropy_rows: target out of range");
    auto r = z.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double denom = 0.0;
    for (double v : r) denom += std::exp(v - mx);
    const double log_denom = std::log(denom);
    auto s = softmax.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s[j] = std::exp(r[j] - mx - log_denom);
    total += log_denom - (r[targets[i]] - mx);
  }
  auto n = make_node(Op::kCrossEntropyRows, Matrix(1, 1, total / static_cast<double>(z.rows())),
                     t.node(logits).needs_grad);
  n.cache = std::move(softmax);
  n.targets.assign(targets.begin(), targets.end());
  n.lhs = logits.id();
  return t.push(std::move(n));
}

}  // namespace modgraph::ad
