#include "skilllab/numeric/autodiff.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace skilllab::nn {

std::string Shape::str() const {
  return "(" + std::to_string(rows) + ", " + std::to_string(cols) + ")";
}

namespace detail {
void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}
}  // namespace detail

namespace {

using detail::Node;

bool all_finite(const Matrix& m) { return m.allFinite(); }

Var unary(const Var& a, Matrix value, std::function<void(Node&)> fn) {
  return Var::make(std::move(value), {a}, std::move(fn));
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  auto dim = [&](Index x, Index y) {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    throw ShapeError(std::string(op) + ": incompatible shapes " + a.str() +
                     " and " + b.str());
  };
  return {dim(a.rows, b.rows), dim(a.cols, b.cols)};
}

Matrix expand(const Matrix& m, Index rows, Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m;
  return m.replicate(rows / m.rows(), cols / m.cols());
}

// Sum a broadcast gradient back down to the operand's shape.
Matrix reduce_to(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Matrix out = g;
  if (rows == 1 && out.rows() != 1) out = out.colwise().sum().eval();
  if (cols == 1 && out.cols() != 1) out = out.rowwise().sum().eval();
  return out;
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

}  // namespace

// ---- Var --------------------------------------------------------------------

Var Var::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->nonfinite = !all_finite(value);
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->nonfinite = !all_finite(value);
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

Var Var::scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

const Matrix& Var::grad() const {
  if (node_->grad.size() == 0) {
    node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

void Var::zero_grad() {
  node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
}

double Var::item() const {
  if (size() != 1) {
    throw ShapeError("item() on non-scalar of shape " + shape().str());
  }
  return node_->value(0, 0);
}

Var Var::make(Matrix value, std::vector<Var> parents,
              std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  bool upstream_nonfinite = false;
  for (const auto& p : parents) {
    n->requires_grad = n->requires_grad || p.requires_grad();
    upstream_nonfinite = upstream_nonfinite || p.nonfinite();
    n->parents.push_back(p.node_);
  }
  n->nonfinite = upstream_nonfinite || !all_finite(value);
  n->value = std::move(value);
  if (n->requires_grad) n->backward_fn = std::move(fn);
  return Var(std::move(n));
}

void backward(const Var& root) {
  if (root.size() != 1) {
    throw ShapeError("backward() requires a scalar root, got " +
                     root.shape().str());
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
}

// ---- binary -----------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape(), "add");
  Matrix v = expand(a.value(), s.rows, s.cols) + expand(b.value(), s.rows, s.cols);
  return Var::make(std::move(v), {a, b}, [](Node& n) {
    for (std::size_t i = 0; i < 2; ++i) {
      Node& p = parent(n, i);
      if (p.requires_grad) {
        p.accumulate(reduce_to(n.grad, p.value.rows(), p.value.cols()));
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape(), "sub");
  Matrix v = expand(a.value(), s.rows, s.cols) - expand(b.value(), s.rows, s.cols);
  return Var::make(std::move(v), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) {
      pa.accumulate(reduce_to(n.grad, pa.value.rows(), pa.value.cols()));
    }
    if (pb.requires_grad) {
      pb.accumulate(reduce_to(-n.grad, pb.value.rows(), pb.value.cols()));
    }
  });
}

Var mul(const Var& a, const Var& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape(), "mul");
  Matrix v = (expand(a.value(), s.rows, s.cols).array() *
              expand(b.value(), s.rows, s.cols).array())
                 .matrix();
  return Var::make(std::move(v), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    const Index r = n.value.rows(), c = n.value.cols();
    if (pa.requires_grad) {
      Matrix g = (n.grad.array() * expand(pb.value, r, c).array()).matrix();
      pa.accumulate(reduce_to(g, pa.value.rows(), pa.value.cols()));
    }
    if (pb.requires_grad) {
      Matrix g = (n.grad.array() * expand(pa.value, r, c).array()).matrix();
      pb.accumulate(reduce_to(g, pb.value.rows(), pb.value.cols()));
    }
  });
}

Var div(const Var& a, const Var& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape(), "div");
  Matrix v = (expand(a.value(), s.rows, s.cols).array() /
              expand(b.value(), s.rows, s.cols).array())
                 .matrix();
  return Var::make(std::move(v), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    const Index r = n.value.rows(), c = n.value.cols();
    const Matrix bv = expand(pb.value, r, c);
    if (pa.requires_grad) {
      Matrix g = (n.grad.array() / bv.array()).matrix();
      pa.accumulate(reduce_to(g, pa.value.rows(), pa.value.cols()));
    }
    if (pb.requires_grad) {
      Matrix g = (-n.grad.array() * n.value.array() / bv.array()).matrix();
      pb.accumulate(reduce_to(g, pb.value.rows(), pb.value.cols()));
    }
  });
}

Var minimum(const Var& a, const Var& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape(), "minimum");
  Matrix av = expand(a.value(), s.rows, s.cols);
  Matrix bv = expand(b.value(), s.rows, s.cols);
  // Ties route the gradient to the first operand.
  Matrix take_a = (av.array() <= bv.array()).cast<double>().matrix();
  Matrix v = av.cwiseMin(bv);
  return Var::make(std::move(v), {a, b}, [take_a](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) {
      Matrix g = (n.grad.array() * take_a.array()).matrix();
      pa.accumulate(reduce_to(g, pa.value.rows(), pa.value.cols()));
    }
    if (pb.requires_grad) {
      Matrix g = (n.grad.array() * (1.0 - take_a.array())).matrix();
      pb.accumulate(reduce_to(g, pb.value.rows(), pb.value.cols()));
    }
  });
}

Var neg(const Var& a) {
  return unary(a, -a.value(), [](Node& n) { parent(n, 0).accumulate(-n.grad); });
}

Var scale(const Var& a, double s) {
  return unary(a, a.value() * s,
               [s](Node& n) { parent(n, 0).accumulate(n.grad * s); });
}

Var add_scalar(const Var& a, double s) {
  Matrix v = (a.value().array() + s).matrix();
  return unary(a, std::move(v), [](Node& n) { parent(n, 0).accumulate(n.grad); });
}

Var operator+(const Var& a, const Var& b) { return add(a, b); }
Var operator-(const Var& a, const Var& b) { return sub(a, b); }
Var operator*(const Var& a, const Var& b) { return mul(a, b); }
Var operator/(const Var& a, const Var& b) { return div(a, b); }
Var operator-(const Var& a) { return neg(a); }
Var operator*(const Var& a, double s) { return scale(a, s); }
Var operator*(double s, const Var& a) { return scale(a, s); }
Var operator+(const Var& a, double s) { return add_scalar(a, s); }
Var operator-(const Var& a, double s) { return add_scalar(a, -s); }

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + a.shape().str() +
                     " and " + b.shape().str());
  }
  Matrix v = a.value() * b.value();
  return Var::make(std::move(v), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) pa.accumulate(n.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * n.grad);
  });
}

// ---- unary ------------------------------------------------------------------

Var exp(const Var& a) {
  Matrix v = a.value().array().exp().matrix();
  return unary(a, std::move(v), [](Node& n) {
    parent(n, 0).accumulate((n.grad.array() * n.value.array()).matrix());
  });
}

Var log(const Var& a) {
  Matrix v = a.value().array().log().matrix();
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate((n.grad.array() / p.value.array()).matrix());
  });
}

double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

Var softplus(const Var& a) {
  Matrix v = a.value().unaryExpr([](double x) { return softplus(x); });
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    Matrix s = p.value.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    p.accumulate((n.grad.array() * s.array()).matrix());
  });
}

Var relu(const Var& a) {
  Matrix v = a.value().cwiseMax(0.0);
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate((n.grad.array() * (p.value.array() > 0.0).cast<double>()).matrix());
  });
}

Var sigmoid(const Var& a) {
  Matrix v = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(
        (n.grad.array() * n.value.array() * (1.0 - n.value.array())).matrix());
  });
}

Var square(const Var& a) {
  Matrix v = a.value().array().square().matrix();
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate((2.0 * n.grad.array() * p.value.array()).matrix());
  });
}

Var clamp(const Var& a, double lo, double hi) {
  Matrix v = a.value().cwiseMax(lo).cwiseMin(hi);
  return unary(a, std::move(v), [lo, hi](Node& n) {
    Node& p = parent(n, 0);
    Matrix pass = ((p.value.array() >= lo) && (p.value.array() <= hi))
                      .cast<double>()
                      .matrix();
    p.accumulate((n.grad.array() * pass.array()).matrix());
  });
}

double lgamma(double x) { return boost::math::lgamma(x); }
double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }

Var lgamma(const Var& a) {
  Matrix v = a.value().unaryExpr([](double x) { return lgamma(x); });
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    Matrix d = p.value.unaryExpr([](double x) { return digamma(x); });
    p.accumulate((n.grad.array() * d.array()).matrix());
  });
}

Var digamma(const Var& a) {
  Matrix v = a.value().unaryExpr([](double x) { return digamma(x); });
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    Matrix d = p.value.unaryExpr([](double x) { return trigamma(x); });
    p.accumulate((n.grad.array() * d.array()).matrix());
  });
}

// ---- reductions -------------------------------------------------------------

Var sum(const Var& a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(Matrix::Constant(p.value.rows(), p.value.cols(), n.grad(0, 0)));
  });
}

Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Var sum_rows(const Var& a) {
  Matrix v = a.value().rowwise().sum();
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(n.grad.replicate(1, p.value.cols()));
  });
}

Var sum_cols(const Var& a) {
  Matrix v = a.value().colwise().sum();
  return unary(a, std::move(v), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(n.grad.replicate(p.value.rows(), 1));
  });
}

Var mean_cols(const Var& a) {
  return scale(sum_cols(a), 1.0 / static_cast<double>(a.rows()));
}

Var broadcast_to(const Var& a, Index rows, Index cols) {
  const Shape s = broadcast_shape(a.shape(), {rows, cols}, "broadcast_to");
  if (s.rows != rows || s.cols != cols) {
    throw ShapeError("broadcast_to: cannot broadcast " + a.shape().str() +
                     " to " + Shape{rows, cols}.str());
  }
  return unary(a, expand(a.value(), rows, cols), [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(reduce_to(n.grad, p.value.rows(), p.value.cols()));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Index rows = parts[0].rows();
  Index cols = 0;
  std::vector<Index> offsets;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + parts[0].shape().str() +
                       " vs " + p.shape().str());
    }
    offsets.push_back(cols);
    cols += p.cols();
  }
  Matrix v(rows, cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v.middleCols(offsets[i], parts[i].cols()) = parts[i].value();
  }
  return Var::make(std::move(v), std::vector<Var>(parts.begin(), parts.end()),
                   [offsets](Node& n) {
                     for (std::size_t i = 0; i < n.parents.size(); ++i) {
                       Node& p = parent(n, i);
                       if (p.requires_grad) {
                         p.accumulate(n.grad.middleCols(offsets[i], p.value.cols()));
                       }
                     }
                   });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of " +
                     a.shape().str());
  }
  Matrix v = a.value().middleCols(start, count);
  return unary(a, std::move(v), [start, count](Node& n) {
    Node& p = parent(n, 0);
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    g.middleCols(start, count) = n.grad;
    p.accumulate(g);
  });
}

Var gather(const Var& a, std::span<const int> index) {
  if (static_cast<Index>(index.size()) != a.rows()) {
    throw ShapeError("gather: index length " + std::to_string(index.size()) +
                     " does not match rows of " + a.shape().str());
  }
  std::vector<int> idx(index.begin(), index.end());
  Matrix v(a.rows(), 1);
  for (Index i = 0; i < a.rows(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.cols()) {
      throw ShapeError("gather: index " + std::to_string(idx[i]) +
                       " out of range for " + a.shape().str());
    }
    v(i, 0) = a.value()(i, idx[i]);
  }
  return unary(a, std::move(v), [idx = std::move(idx)](Node& n) {
    Node& p = parent(n, 0);
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    for (Index i = 0; i < g.rows(); ++i) g(i, idx[i]) = n.grad(i, 0);
    p.accumulate(g);
  });
}

Var gather_rows(const Var& a, std::span<const int> index) {
  std::vector<int> idx(index.begin(), index.end());
  Matrix v(static_cast<Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) +
                       " out of range for " + a.shape().str());
    }
    v.row(static_cast<Index>(i)) = a.value().row(idx[i]);
  }
  return unary(a, std::move(v), [idx = std::move(idx)](Node& n) {
    Node& p = parent(n, 0);
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      g.row(idx[i]) += n.grad.row(static_cast<Index>(i));
    }
    p.accumulate(g);
  });
}

Var logsumexp_rows(const Var& a) {
  const Matrix& x = a.value();
  Matrix v(x.rows(), 1);
  Matrix soft(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    if (!std::isfinite(m)) {
      v(i, 0) = m;
      soft.row(i).setConstant(1.0 / static_cast<double>(x.cols()));
      continue;
    }
    auto e = (x.row(i).array() - m).exp();
    const double s = e.sum();
    v(i, 0) = m + std::log(s);
    soft.row(i) = (e / s).matrix();
  }
  return unary(a, std::move(v), [soft = std::move(soft)](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate((soft.array().colwise() * n.grad.col(0).array()).matrix());
  });
}

Var log_softmax(const Var& a) {
  return sub(a, logsumexp_rows(a));
}

}  // namespace skilllab::nn
