#include "gcrl/autograd.hpp"

#include <cmath>
#include <string>

#include "gcrl/errors.hpp"

namespace gcrl::autograd {

namespace {
const Matrix kEmpty;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": operand shapes differ (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}
}  // namespace

const Matrix& Var::value() const { return tape_->node(*this).val(); }

const Matrix& Var::grad() const {
  const auto& n = tape_->node(*this);
  return n.needs_grad ? n.grad : kEmpty;
}

void Tape::check(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw StateError("variable does not belong to this tape");
}

Tape::Node& Tape::node(Var v) {
  check(v);
  return nodes_[v.id_];
}

const Tape::Node& Tape::node(Var v) const {
  check(v);
  return nodes_[v.id_];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(const Matrix& value, Matrix* grad_sink) {
  Node n;
  n.ref = &value;
  n.sink = grad_sink;
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::constant_ref(const Matrix& value) {
  Node n;
  n.ref = &value;
  return push(std::move(n));
}

Var Tape::input(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::affine(Var x, Var w, Var b) {
  const Matrix& xv = node(x).val();
  const Matrix& wv = node(w).val();
  const Matrix& bv = node(b).val();
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw DimensionError("affine: input has " + std::to_string(xv.cols()) + " columns, weight expects " +
                         std::to_string(wv.rows()));
  }
  Node n;
  n.op = Op::affine;
  n.value.noalias() = xv * wv;
  n.value.rowwise() += bv.row(0);
  n.a = x.id_;
  n.b = w.id_;
  n.c = b.id_;
  n.needs_grad = node(x).needs_grad || node(w).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.op = Op::relu;
  n.value = node(x).val().cwiseMax(0.0);
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var x) {
  Node n;
  n.op = Op::tanh;
  n.value = node(x).val().array().tanh().matrix();
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same_shape(node(a).val(), node(b).val(), "add");
  Node n;
  n.op = Op::add;
  n.value = node(a).val() + node(b).val();
  n.a = a.id_;
  n.b = b.id_;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(node(a).val(), node(b).val(), "sub");
  Node n;
  n.op = Op::sub;
  n.value = node(a).val() - node(b).val();
  n.a = a.id_;
  n.b = b.id_;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::neg(Var a) { return scale(a, -1.0); }

Var Tape::scale(Var a, double factor) {
  Node n;
  n.op = Op::scale;
  n.value = factor * node(a).val();
  n.factor = factor;
  n.a = a.id_;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
  const Matrix& av = node(a).val();
  const Matrix& bv = node(b).val();
  if (av.rows() != bv.rows()) throw DimensionError("concat: row counts differ");
  Node n;
  n.op = Op::concat;
  n.value.resize(av.rows(), av.cols() + bv.cols());
  n.value << av, bv;
  n.a = a.id_;
  n.b = b.id_;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::row_norm(Var x) {
  Node n;
  n.op = Op::row_norm;
  n.value = node(x).val().rowwise().norm();
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::row_max_positive(Var x) {
  const Matrix& xv = node(x).val();
  if (xv.cols() == 0) throw DimensionError("row_max_positive: no columns");
  Node n;
  n.op = Op::row_max_positive;
  n.value.resize(xv.rows(), 1);
  n.aux.resize(xv.rows(), 1);  // winning column, or -1 when the max is clipped at 0
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < xv.cols(); ++c) {
      if (xv(r, c) > xv(r, best)) best = c;
    }
    const double top = xv(r, best);
    n.value(r, 0) = top > 0.0 ? top : 0.0;
    n.aux(r, 0) = top > 0.0 ? static_cast<double>(best) : -1.0;
  }
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::clip_below(Var x, Matrix lower, ClipGradient mode) {
  const Matrix& xv = node(x).val();
  require_same_shape(xv, lower, "clip_below");
  Node n;
  n.op = Op::clip_below;
  n.value = xv.cwiseMax(lower);
  if (mode == ClipGradient::hard) {
    n.aux = (xv.array() >= lower.array()).cast<double>().matrix();
  } else {
    n.aux = Matrix::Ones(xv.rows(), xv.cols());
  }
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::square(Var x) {
  Node n;
  n.op = Op::square;
  n.value = node(x).val().array().square().matrix();
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::mean(Var x) {
  const Matrix& xv = node(x).val();
  if (xv.size() == 0) throw DimensionError("mean of an empty matrix");
  Node n;
  n.op = Op::mean;
  n.value = Matrix::Constant(1, 1, xv.mean());
  n.a = x.id_;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  check(loss);
  if (node(loss).val().size() != 1) throw DimensionError("backward() needs a scalar (1x1) loss");
  const std::size_t last = loss.id_;
  for (std::size_t i = 0; i <= last; ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad) n.grad.setZero(n.val().rows(), n.val().cols());
  }
  if (!nodes_[last].needs_grad) return;
  nodes_[last].grad(0, 0) = 1.0;

  for (std::size_t i = last + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::leaf:
        if (n.sink) *n.sink += g;
        break;
      case Op::affine: {
        Node& x = nodes_[n.a];
        Node& w = nodes_[n.b];
        Node& b = nodes_[n.c];
        if (x.needs_grad) x.grad.noalias() += g * w.val().transpose();
        if (w.needs_grad) w.grad.noalias() += x.val().transpose() * g;
        if (b.needs_grad) b.grad += g.colwise().sum();
        break;
      }
      case Op::relu: {
        Node& x = nodes_[n.a];
        x.grad.array() += g.array() * (x.val().array() > 0.0).cast<double>();
        break;
      }
      case Op::tanh: {
        Node& x = nodes_[n.a];
        x.grad.array() += g.array() * (1.0 - n.value.array().square());
        break;
      }
      case Op::add:
        if (nodes_[n.a].needs_grad) nodes_[n.a].grad += g;
        if (nodes_[n.b].needs_grad) nodes_[n.b].grad += g;
        break;
      case Op::sub:
        if (nodes_[n.a].needs_grad) nodes_[n.a].grad += g;
        if (nodes_[n.b].needs_grad) nodes_[n.b].grad -= g;
        break;
      case Op::scale:
        nodes_[n.a].grad += n.factor * g;
        break;
      case Op::concat: {
        Node& a = nodes_[n.a];
        Node& b = nodes_[n.b];
        const Eigen::Index ac = a.val().cols();
        if (a.needs_grad) a.grad += g.leftCols(ac);
        if (b.needs_grad) b.grad += g.rightCols(b.val().cols());
        break;
      }
      case Op::row_norm: {
        Node& x = nodes_[n.a];
        for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
          const double norm = n.value(r, 0);
          if (norm > 0.0) x.grad.row(r) += (g(r, 0) / norm) * x.val().row(r);
        }
        break;
      }
      case Op::row_max_positive: {
        Node& x = nodes_[n.a];
        for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
          const auto col = static_cast<Eigen::Index>(n.aux(r, 0));
          if (col >= 0) x.grad(r, col) += g(r, 0);
        }
        break;
      }
      case Op::clip_below:
        nodes_[n.a].grad.array() += g.array() * n.aux.array();
        break;
      case Op::square: {
        Node& x = nodes_[n.a];
        x.grad.array() += 2.0 * g.array() * x.val().array();
        break;
      }
      case Op::mean: {
        Node& x = nodes_[n.a];
        x.grad.array() += g(0, 0) / static_cast<double>(x.val().size());
        break;
      }
    }
  }
}

}  // namespace gcrl::autograd
