#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>

namespace hyst {

namespace detail {

template <typename A, typename B>
void check_pair(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("metrics: length mismatch");
  if (truth.size() == 0) throw std::invalid_argument("metrics: empty input");
}

}  // namespace detail

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// ||pred - truth||_2 / ||truth||_2
template <typename A, typename B>
typename A::Scalar rel_l2(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  detail::check_pair(pred, truth);
  const auto denom = truth.norm();
  if (denom == 0) throw std::invalid_argument("rel_l2: truth has zero norm");
  return (pred - truth).norm() / denom;
}

// 1 - sum (truth - pred)^2 / sum (truth - mean)^2. Undefined (nullopt) when
// the truth has zero variance.
template <typename A, typename B>
std::optional<typename A::Scalar> explained_variance(const Eigen::MatrixBase<A>& pred,
                                                     const Eigen::MatrixBase<B>& truth) {
  detail::check_pair(pred, truth);
  using S = typename A::Scalar;
  const S mean = truth.mean();
  const S denom = (truth.array() - mean).square().sum();
  if (denom == S(0)) return std::nullopt;
  return S(1) - (truth - pred).squaredNorm() / denom;
}

template <typename A, typename B>
typename A::Scalar max_error(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  detail::check_pair(pred, truth);
  return (truth - pred).cwiseAbs().maxCoeff();
}

template <typename A, typename B>
typename A::Scalar mean_abs_error(const Eigen::MatrixBase<A>& pred, const Eigen::MatrixBase<B>& truth) {
  detail::check_pair(pred, truth);
  return (truth - pred).cwiseAbs().mean();
}

}  // namespace hyst
