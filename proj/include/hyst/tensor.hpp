#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hyst::ad {

using Index = Eigen::Index;

// Dense rank-1 or rank-2 tensor with row-major storage.
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tensor() = default;

  static Tensor vector(Index len) {
    Tensor t;
    t.rank_ = 1;
    t.rows_ = len;
    t.cols_ = 1;
    t.data_ = Vector::Zero(len);
    return t;
  }

  static Tensor matrix(Index rows, Index cols) {
    Tensor t;
    t.rank_ = 2;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_ = Vector::Zero(rows * cols);
    return t;
  }

  template <typename Derived>
  static Tensor from_vector(const Eigen::MatrixBase<Derived>& v) {
    Tensor t = vector(v.size());
    t.data_ = v.template cast<Scalar>();
    return t;
  }

  template <typename Derived>
  static Tensor from_matrix(const Eigen::MatrixBase<Derived>& m) {
    Tensor t = matrix(m.rows(), m.cols());
    t.mat() = m.template cast<Scalar>();
    return t;
  }

  int rank() const { return rank_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return data_.size(); }

  bool same_shape(const Tensor& other) const {
    return rank_ == other.rank_ && rows_ == other.rows_ && cols_ == other.cols_;
  }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Eigen::Map<Vector> flat() { return {data_.data(), data_.size()}; }
  Eigen::Map<const Vector> flat() const { return {data_.data(), data_.size()}; }

  Eigen::Map<Matrix> mat() { return {data_.data(), rows_, cols_}; }
  Eigen::Map<const Matrix> mat() const { return {data_.data(), rows_, cols_}; }

  Scalar& operator()(Index i) { return data_[i]; }
  Scalar operator()(Index i) const { return data_[i]; }
  Scalar& operator()(Index r, Index c) { return data_[r * cols_ + c]; }
  Scalar operator()(Index r, Index c) const { return data_[r * cols_ + c]; }

  bool all_finite() const { return data_.allFinite(); }

  template <typename To>
  Tensor<To> cast() const {
    Tensor<To> out = rank_ == 1 ? Tensor<To>::vector(rows_) : Tensor<To>::matrix(rows_, cols_);
    out.flat() = data_.template cast<To>();
    return out;
  }

  std::string shape_string() const {
    if (rank_ == 1) return "(" + std::to_string(rows_) + ",)";
    return "(" + std::to_string(rows_) + "," + std::to_string(cols_) + ")";
  }

 private:
  int rank_ = 1;
  Index rows_ = 0;
  Index cols_ = 1;
  Vector data_;
};

}  // namespace hyst::ad
