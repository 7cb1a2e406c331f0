#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

#include "hyst/tensor.hpp"

namespace hyst::ad {

template <typename Scalar>
class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// tape that produced it has not been cleared.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape<Scalar>& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  Index size() const { return tape_->size_of(*this); }
  Scalar scalar() const { return tape_->scalar(*this); }
  Tensor<Scalar> value() const { return tape_->value(*this); }

 private:
  Tape<Scalar>* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Reverse-mode record of a computation over small dense tensors.
//
// Forward values and adjoints live in two flat arenas indexed by node, so a
// cleared tape is reused without reallocating once it has seen the largest
// graph. Nodes are appended in evaluation order, which is a valid topological
// order for the backward sweep.
template <typename Scalar>
class Tape {
 public:
  using Vector = typename Tensor<Scalar>::Vector;
  using Matrix = typename Tensor<Scalar>::Matrix;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;

  enum class Op : std::uint8_t {
    leaf,
    matvec,
    add,
    sub,
    mul,
    scale,
    tanh,
    sigmoid,
    abs_square,
    concat,
    sum,
    mse,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. Constants never receive adjoints; variables do.
  Var<Scalar> constant(const Tensor<Scalar>& t) { return leaf(t, false); }
  Var<Scalar> variable(const Tensor<Scalar>& t) { return leaf(t, true); }
  Var<Scalar> constant(std::initializer_list<Scalar> values);
  Var<Scalar> constant(std::span<const Scalar> values);
  Var<Scalar> zeros(Index len);

  Var<Scalar> matvec(Var<Scalar> w, Var<Scalar> x);
  Var<Scalar> add(Var<Scalar> a, Var<Scalar> b);
  Var<Scalar> sub(Var<Scalar> a, Var<Scalar> b);
  Var<Scalar> mul(Var<Scalar> a, Var<Scalar> b);
  Var<Scalar> scale(Scalar c, Var<Scalar> a);
  Var<Scalar> tanh(Var<Scalar> a);
  Var<Scalar> sigmoid(Var<Scalar> a);
  Var<Scalar> abs_square(Var<Scalar> a);
  Var<Scalar> concat(std::span<const Var<Scalar>> parts);
  Var<Scalar> sum(Var<Scalar> a);
  // Mean of squared differences; returns a scalar node.
  Var<Scalar> mse_loss(Var<Scalar> pred, Var<Scalar> target);

  // Populates adjoints of every node reachable from a scalar loss.
  void backward(Var<Scalar> loss);

  Tensor<Scalar> value(Var<Scalar> v) const;
  ConstVectorMap values(Var<Scalar> v) const;
  Scalar scalar(Var<Scalar> v) const;
  Index size_of(Var<Scalar> v) const { return nodes_[v.id()].size(); }

  // Adjoint of a node after backward(); zero for nodes the loss does not reach.
  Tensor<Scalar> gradient(Var<Scalar> v) const;
  ConstVectorMap adjoint(Var<Scalar> v) const;

  std::size_t node_count() const { return nodes_.size(); }
  void clear();
  void reserve(std::size_t nodes, std::size_t scalars);

 private:
  struct Node {
    Op op = Op::leaf;
    std::uint8_t rank = 1;
    bool needs_grad = false;
    std::uint32_t lhs = 0;
    std::uint32_t rhs = 0;
    Index offset = 0;
    Index rows = 0;
    Index cols = 1;
    Scalar coef = 0;

    Index size() const { return rows * cols; }
  };

  Var<Scalar> leaf(const Tensor<Scalar>& t, bool needs_grad);
  std::uint32_t push(Op op, int rank, Index rows, Index cols, std::uint32_t lhs, std::uint32_t rhs,
                     bool needs_grad, Scalar coef = 0);
  void check_owner(Var<Scalar> v) const;
  void check_same_shape(Var<Scalar> a, Var<Scalar> b, const char* op) const;

  VectorMap val(std::uint32_t id) { return {values_.data() + nodes_[id].offset, nodes_[id].size()}; }
  ConstVectorMap val(std::uint32_t id) const {
    return {values_.data() + nodes_[id].offset, nodes_[id].size()};
  }
  VectorMap adj(std::uint32_t id) { return {adjoints_.data() + nodes_[id].offset, nodes_[id].size()}; }
  ConstMatrixMap val_mat(std::uint32_t id) const {
    return {values_.data() + nodes_[id].offset, nodes_[id].rows, nodes_[id].cols};
  }
  MatrixMap adj_mat(std::uint32_t id) {
    return {adjoints_.data() + nodes_[id].offset, nodes_[id].rows, nodes_[id].cols};
  }

  void backward_node(std::uint32_t id);

  std::vector<Node> nodes_;
  std::vector<Scalar> values_;
  std::vector<Scalar> adjoints_;
  std::vector<std::uint32_t> links_;  // concat inputs
  bool has_adjoints_ = false;
};

// Expression-style front end.

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  return a.tape().add(a, b);
}
template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a, Var<Scalar> b) {
  return a.tape().sub(a, b);
}
// Matrix-vector product when the left operand is rank 2.
template <typename Scalar>
Var<Scalar> operator*(Var<Scalar> w, Var<Scalar> x) {
  return w.tape().matvec(w, x);
}
template <typename Scalar>
Var<Scalar> operator*(Scalar c, Var<Scalar> a) {
  return a.tape().scale(c, a);
}
template <typename Scalar>
Var<Scalar> cwise_product(Var<Scalar> a, Var<Scalar> b) {
  return a.tape().mul(a, b);
}
template <typename Scalar>
Var<Scalar> tanh(Var<Scalar> a) {
  return a.tape().tanh(a);
}
template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  return a.tape().sigmoid(a);
}
template <typename Scalar>
Var<Scalar> abs_square(Var<Scalar> a) {
  return a.tape().abs_square(a);
}
template <typename Scalar>
Var<Scalar> sum(Var<Scalar> a) {
  return a.tape().sum(a);
}
template <typename Scalar>
Var<Scalar> mse_loss(Var<Scalar> pred, Var<Scalar> target) {
  return pred.tape().mse_loss(pred, target);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
void Tape<Scalar>::check_owner(Var<Scalar> v) const {
  if (&v.tape() != this || v.id() >= nodes_.size()) {
    throw std::invalid_argument("tape: variable does not belong to this tape");
  }
}

template <typename Scalar>
void Tape<Scalar>::check_same_shape(Var<Scalar> a, Var<Scalar> b, const char* op) const {
  check_owner(a);
  check_owner(b);
  const Node& x = nodes_[a.id()];
  const Node& y = nodes_[b.id()];
  if (x.rows != y.rows || x.cols != y.cols || x.rank != y.rank) {
    throw std::invalid_argument(std::string("tape: shape mismatch in ") + op);
  }
}

template <typename Scalar>
std::uint32_t Tape<Scalar>::push(Op op, int rank, Index rows, Index cols, std::uint32_t lhs,
                                 std::uint32_t rhs, bool needs_grad, Scalar coef) {
  Node n;
  n.op = op;
  n.rank = static_cast<std::uint8_t>(rank);
  n.needs_grad = needs_grad;
  n.lhs = lhs;
  n.rhs = rhs;
  n.offset = static_cast<Index>(values_.size());
  n.rows = rows;
  n.cols = cols;
  n.coef = coef;
  values_.resize(values_.size() + static_cast<std::size_t>(rows * cols));
  nodes_.push_back(n);
  has_adjoints_ = false;
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::leaf(const Tensor<Scalar>& t, bool needs_grad) {
  const auto id = push(Op::leaf, t.rank(), t.rows(), t.cols(), 0, 0, needs_grad);
  val(id) = t.flat();
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::constant(std::initializer_list<Scalar> values) {
  return constant(std::span<const Scalar>(values.begin(), values.size()));
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::constant(std::span<const Scalar> values) {
  const auto n = static_cast<Index>(values.size());
  const auto id = push(Op::leaf, 1, n, 1, 0, 0, false);
  val(id) = ConstVectorMap(values.data(), n);
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::zeros(Index len) {
  const auto id = push(Op::leaf, 1, len, 1, 0, 0, false);
  val(id).setZero();
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::matvec(Var<Scalar> w, Var<Scalar> x) {
  check_owner(w);
  check_owner(x);
  const Node wn = nodes_[w.id()];
  const Node xn = nodes_[x.id()];
  if (wn.rank != 2 || xn.rank != 1 || wn.cols != xn.rows) {
    throw std::invalid_argument("tape: matvec expects (m,k) x (k,)");
  }
  const auto id = push(Op::matvec, 1, wn.rows, 1, w.id(), x.id(), wn.needs_grad || xn.needs_grad);
  val(id).noalias() = val_mat(w.id()) * val(x.id());
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::add(Var<Scalar> a, Var<Scalar> b) {
  check_same_shape(a, b, "add");
  const Node an = nodes_[a.id()];
  const auto id = push(Op::add, an.rank, an.rows, an.cols, a.id(), b.id(),
                       an.needs_grad || nodes_[b.id()].needs_grad);
  val(id) = val(a.id()) + val(b.id());
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::sub(Var<Scalar> a, Var<Scalar> b) {
  check_same_shape(a, b, "sub");
  const Node an = nodes_[a.id()];
  const auto id = push(Op::sub, an.rank, an.rows, an.cols, a.id(), b.id(),
                       an.needs_grad || nodes_[b.id()].needs_grad);
  val(id) = val(a.id()) - val(b.id());
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::mul(Var<Scalar> a, Var<Scalar> b) {
  check_same_shape(a, b, "mul");
  const Node an = nodes_[a.id()];
  const auto id = push(Op::mul, an.rank, an.rows, an.cols, a.id(), b.id(),
                       an.needs_grad || nodes_[b.id()].needs_grad);
  val(id) = val(a.id()).cwiseProduct(val(b.id()));
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::scale(Scalar c, Var<Scalar> a) {
  check_owner(a);
  const Node an = nodes_[a.id()];
  const auto id = push(Op::scale, an.rank, an.rows, an.cols, a.id(), 0, an.needs_grad, c);
  val(id) = c * val(a.id());
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::tanh(Var<Scalar> a) {
  check_owner(a);
  const Node an = nodes_[a.id()];
  const auto id = push(Op::tanh, an.rank, an.rows, an.cols, a.id(), 0, an.needs_grad);
  val(id) = val(a.id()).array().tanh();
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::sigmoid(Var<Scalar> a) {
  check_owner(a);
  const Node an = nodes_[a.id()];
  const auto id = push(Op::sigmoid, an.rank, an.rows, an.cols, a.id(), 0, an.needs_grad);
  val(id) = (Scalar(1) + (-val(a.id()).array()).exp()).inverse();
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::abs_square(Var<Scalar> a) {
  check_owner(a);
  const Node an = nodes_[a.id()];
  const auto id = push(Op::abs_square, an.rank, an.rows, an.cols, a.id(), 0, an.needs_grad);
  val(id) = val(a.id()).array().abs2();
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::concat(std::span<const Var<Scalar>> parts) {
  Index total = 0;
  bool needs = false;
  const auto first_link = static_cast<std::uint32_t>(links_.size());
  for (const auto& p : parts) {
    check_owner(p);
    const Node& pn = nodes_[p.id()];
    if (pn.rank != 1) throw std::invalid_argument("tape: concat expects rank-1 parts");
    total += pn.size();
    needs = needs || pn.needs_grad;
    links_.push_back(p.id());
  }
  const auto id = push(Op::concat, 1, total, 1, first_link, static_cast<std::uint32_t>(parts.size()),
                       needs);
  Index pos = 0;
  for (const auto& p : parts) {
    const Index n = nodes_[p.id()].size();
    val(id).segment(pos, n) = val(p.id());
    pos += n;
  }
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::sum(Var<Scalar> a) {
  check_owner(a);
  const auto id = push(Op::sum, 1, 1, 1, a.id(), 0, nodes_[a.id()].needs_grad);
  val(id)[0] = val(a.id()).sum();
  return {this, id};
}

template <typename Scalar>
Var<Scalar> Tape<Scalar>::mse_loss(Var<Scalar> pred, Var<Scalar> target) {
  check_same_shape(pred, target, "mse_loss");
  const auto n = nodes_[pred.id()].size();
  if (n == 0) throw std::invalid_argument("tape: mse_loss of empty tensors");
  const auto id = push(Op::mse, 1, 1, 1, pred.id(), target.id(),
                       nodes_[pred.id()].needs_grad || nodes_[target.id()].needs_grad);
  val(id)[0] = (val(pred.id()) - val(target.id())).squaredNorm() / static_cast<Scalar>(n);
  return {this, id};
}

template <typename Scalar>
void Tape<Scalar>::backward(Var<Scalar> loss) {
  check_owner(loss);
  if (nodes_[loss.id()].size() != 1) {
    throw std::invalid_argument("tape: backward requires a scalar loss");
  }
  adjoints_.assign(values_.size(), Scalar(0));
  adj(loss.id())[0] = Scalar(1);
  for (std::uint32_t i = loss.id() + 1; i-- > 0;) {
    if (nodes_[i].needs_grad && nodes_[i].op != Op::leaf) backward_node(i);
  }
  has_adjoints_ = true;
}

template <typename Scalar>
void Tape<Scalar>::backward_node(std::uint32_t id) {
  const Node n = nodes_[id];
  const bool lhs_grad = nodes_[n.lhs].needs_grad;
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matvec: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      if (lhs_grad) adj_mat(n.lhs).noalias() += g * val(n.rhs).transpose();
      if (nodes_[n.rhs].needs_grad) adj(n.rhs).noalias() += val_mat(n.lhs).transpose() * g;
      break;
    }
    case Op::add: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      if (lhs_grad) adj(n.lhs) += g;
      if (nodes_[n.rhs].needs_grad) adj(n.rhs) += g;
      break;
    }
    case Op::sub: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      if (lhs_grad) adj(n.lhs) += g;
      if (nodes_[n.rhs].needs_grad) adj(n.rhs) -= g;
      break;
    }
    case Op::mul: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      if (lhs_grad) adj(n.lhs) += g.cwiseProduct(val(n.rhs));
      if (nodes_[n.rhs].needs_grad) adj(n.rhs) += g.cwiseProduct(val(n.lhs));
      break;
    }
    case Op::scale: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      adj(n.lhs) += n.coef * g;
      break;
    }
    case Op::tanh: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      const auto y = val(id);
      adj(n.lhs).array() += g.array() * (Scalar(1) - y.array().square());
      break;
    }
    case Op::sigmoid: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      const auto y = val(id);
      adj(n.lhs).array() += g.array() * y.array() * (Scalar(1) - y.array());
      break;
    }
    case Op::abs_square: {
      const auto g = ConstVectorMap(adjoints_.data() + n.offset, n.size());
      adj(n.lhs).array() += Scalar(2) * g.array() * val(n.lhs).array();
      break;
    }
    case Op::concat: {
      Index pos = 0;
      for (std::uint32_t k = 0; k < n.rhs; ++k) {
        const auto part = links_[n.lhs + k];
        const Index len = nodes_[part].size();
        if (nodes_[part].needs_grad) {
          adj(part) += ConstVectorMap(adjoints_.data() + n.offset + pos, len);
        }
        pos += len;
      }
      break;
    }
    case Op::sum: {
      adj(n.lhs).array() += adjoints_[static_cast<std::size_t>(n.offset)];
      break;
    }
    case Op::mse: {
      const Scalar g = adjoints_[static_cast<std::size_t>(n.offset)];
      const Scalar c = Scalar(2) * g / static_cast<Scalar>(nodes_[n.lhs].size());
      if (lhs_grad) adj(n.lhs) += c * (val(n.lhs) - val(n.rhs));
      if (nodes_[n.rhs].needs_grad) adj(n.rhs) -= c * (val(n.lhs) - val(n.rhs));
      break;
    }
  }
}

template <typename Scalar>
Tensor<Scalar> Tape<Scalar>::value(Var<Scalar> v) const {
  check_owner(v);
  const Node& n = nodes_[v.id()];
  Tensor<Scalar> t = n.rank == 1 ? Tensor<Scalar>::vector(n.rows) : Tensor<Scalar>::matrix(n.rows, n.cols);
  t.flat() = val(v.id());
  return t;
}

template <typename Scalar>
typename Tape<Scalar>::ConstVectorMap Tape<Scalar>::values(Var<Scalar> v) const {
  check_owner(v);
  return val(v.id());
}

template <typename Scalar>
Scalar Tape<Scalar>::scalar(Var<Scalar> v) const {
  check_owner(v);
  if (nodes_[v.id()].size() != 1) throw std::invalid_argument("tape: node is not a scalar");
  return values_[static_cast<std::size_t>(nodes_[v.id()].offset)];
}

template <typename Scalar>
Tensor<Scalar> Tape<Scalar>::gradient(Var<Scalar> v) const {
  check_owner(v);
  const Node& n = nodes_[v.id()];
  Tensor<Scalar> t = n.rank == 1 ? Tensor<Scalar>::vector(n.rows) : Tensor<Scalar>::matrix(n.rows, n.cols);
  if (has_adjoints_) t.flat() = adjoint(v);
  return t;
}

template <typename Scalar>
typename Tape<Scalar>::ConstVectorMap Tape<Scalar>::adjoint(Var<Scalar> v) const {
  check_owner(v);
  if (!has_adjoints_) throw std::logic_error("tape: adjoint requested before backward()");
  const Node& n = nodes_[v.id()];
  return {adjoints_.data() + n.offset, n.size()};
}

template <typename Scalar>
void Tape<Scalar>::clear() {
  nodes_.clear();
  values_.clear();
  adjoints_.clear();
  links_.clear();
  has_adjoints_ = false;
}

template <typename Scalar>
void Tape<Scalar>::reserve(std::size_t nodes, std::size_t scalars) {
  nodes_.reserve(nodes);
  values_.reserve(scalars);
  adjoints_.reserve(scalars);
}

extern template class Tape<double>;
extern template class Tape<long double>;

}  // namespace hyst::ad
