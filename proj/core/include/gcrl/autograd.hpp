#pragma once

// Minimal tape-based reverse-mode differentiation over dense matrices.
//
// Every value is a batch-major Eigen matrix (rows = samples). The op set is
// exactly what the MRN critic and the actor need; nothing else is supported.
// A Tape records nodes in creation order, so a single reverse sweep visits
// each node once and every reachable parameter sink receives its full
// gradient (parameters used several times accumulate).

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace gcrl::autograd {

using Matrix = Eigen::MatrixXd;

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Gradient of the last backward() target with respect to this node.
  /// Empty for nodes that do not depend on any parameter.
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// How the gradient crosses an active lower clip.
enum class ClipGradient {
  hard,              ///< zero where the bound is active
  straight_through,  ///< identity everywhere
};

class Tape {
 public:
  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient is computed and, if grad_sink is non-null, added to
  /// *grad_sink during backward(). The referenced value must outlive the tape.
  Var parameter(const Matrix& value, Matrix* grad_sink);
  /// Non-differentiable leaf that references external storage (no copy).
  Var constant_ref(const Matrix& value);
  /// Constant leaf that still reports its gradient via Var::grad() (used for
  /// inputs such as actions whose sensitivity is wanted).
  Var input(Matrix value);

  /// x * w + b, with x (B x in), w (in x out), b (1 x out) broadcast over rows.
  Var affine(Var x, Var w, Var b);
  Var relu(Var x);
  Var tanh(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double factor);
  /// Column concatenation [a b].
  Var concat(Var a, Var b);
  /// Euclidean norm of each row (B x 1); subgradient 0 at the zero row.
  Var row_norm(Var x);
  /// max_i max(x_i, 0) per row (B x 1). Gradient goes to the first maximal
  /// coordinate, and nowhere when the maximum is not positive.
  Var row_max_positive(Var x);
  /// Elementwise max(x, lower); lower has x's shape.
  Var clip_below(Var x, Matrix lower, ClipGradient mode = ClipGradient::hard);
  Var square(Var x);
  /// Mean over all entries (1 x 1).
  Var mean(Var x);

  /// Reverse sweep from a 1 x 1 node.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;

  enum class Op {
    leaf, affine, relu, tanh, add, sub, scale, concat, row_norm, row_max_positive, clip_below, square, mean
  };

  struct Node {
    Op op = Op::leaf;
    Matrix value;
    const Matrix* ref = nullptr;  // parameter leaves point at external storage
    Matrix grad;
    Matrix aux;  // op-specific cache (mask, argmax index, ...)
    Matrix* sink = nullptr;
    std::size_t a = 0, b = 0, c = 0;
    double factor = 0.0;
    bool needs_grad = false;

    const Matrix& val() const { return ref ? *ref : value; }
  };

  Var push(Node node);
  Node& node(Var v);
  const Node& node(Var v) const;
  void check(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace gcrl::autograd
