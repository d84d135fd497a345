#pragma once

// Reverse-mode automatic differentiation over dense rank-2 arrays.
//
// Every value is a row-major matrix of doubles. Vectors are 1xn or nx1 and
// scalars are 1x1. Operations build a DAG of nodes; backward() walks it in
// reverse topological order and accumulates gradients into every node that
// requires them. Leaf parameters keep their gradient between backward calls
// until zero_grad() is invoked.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skilllab::nn {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Shape {
  Index rows = 0;
  Index cols = 0;
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
struct Node {
  Matrix value;
  Matrix grad;  // empty until the first accumulation
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;
  bool nonfinite = false;

  void accumulate(const Matrix& g);
};
}  // namespace detail

class Var {
 public:
  Var() = default;

  static Var constant(Matrix value);
  static Var parameter(Matrix value);
  static Var scalar(double v);

  bool defined() const { return static_cast<bool>(node_); }
  const Matrix& value() const { return node_->value; }
  // Direct write access for optimizers and checkpoint loading.
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const;
  void zero_grad();

  Shape shape() const { return {node_->value.rows(), node_->value.cols()}; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  // True when this value or any upstream value left its finite domain.
  bool nonfinite() const { return node_->nonfinite; }
  double item() const;

  Var detach() const { return constant(node_->value); }

  // Internal: build an op node. `fn` receives the node and must push
  // gradients into parents that require them.
  static Var make(Matrix value, std::vector<Var> parents,
                  std::function<void(detail::Node&)> fn);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Var(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;
};

// Accumulates d(root)/d(x) into every reachable node that requires grad.
// Throws ShapeError when root is not 1x1.
void backward(const Var& root);

// ---- element-wise and broadcasting arithmetic ------------------------------
// Binary ops broadcast rank-2 operands where a dimension is 1.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var minimum(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(const Var& a, double s);
Var operator*(double s, const Var& a);
Var operator+(const Var& a, double s);
Var operator-(const Var& a, double s);

Var matmul(const Var& a, const Var& b);

// ---- unary maps -------------------------------------------------------------
Var exp(const Var& a);
Var log(const Var& a);
Var softplus(const Var& a);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var square(const Var& a);
Var clamp(const Var& a, double lo, double hi);
Var lgamma(const Var& a);
Var digamma(const Var& a);

// ---- reductions and reshaping ----------------------------------------------
Var sum(const Var& a);       // -> 1x1
Var mean(const Var& a);      // -> 1x1
Var sum_rows(const Var& a);  // sum over columns, -> rows x 1
Var sum_cols(const Var& a);  // sum over rows, -> 1 x cols
Var mean_cols(const Var& a);
Var broadcast_to(const Var& a, Index rows, Index cols);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, Index start, Index count);
// out(i, 0) = a(i, index[i])
Var gather(const Var& a, std::span<const int> index);
// out.row(i) = a.row(index[i])
Var gather_rows(const Var& a, std::span<const int> index);
// Row-wise log-softmax, numerically stabilized.
Var log_softmax(const Var& a);
// Row-wise log-sum-exp, -> rows x 1.
Var logsumexp_rows(const Var& a);

// Scalar special functions shared with non-graph code.
double digamma(double x);
double trigamma(double x);
double lgamma(double x);
double softplus(double x);

}  // namespace skilllab::nn
