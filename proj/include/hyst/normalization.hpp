#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "hyst/trace.hpp"

namespace hyst {

// Per-channel min/max of the training trace. Test traces reuse these.
struct NormStats {
  double h_min = -1.0;
  double h_max = 1.0;
  double b_min = -1.0;
  double b_max = 1.0;

  void validate() const {
    if (!(h_min < h_max) || !(b_min < b_max)) {
      throw std::invalid_argument("normalization: min must be below max on each channel");
    }
  }
};

// Fails when a channel is constant.
NormStats fit_norm(const HysteresisTrace& trace);

// Maps [lo, hi] onto [-1, 1].
template <typename Scalar>
Scalar normalize(Scalar x, Scalar lo, Scalar hi) {
  return (x - lo) / (hi - lo) * Scalar(2) - Scalar(1);
}

// Inverse of normalize.
template <typename Scalar>
Scalar denormalize(Scalar s, Scalar lo, Scalar hi) {
  return (s + Scalar(1)) / Scalar(2) * (hi - lo) + lo;
}

template <typename Derived>
auto normalize(const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar lo,
               typename Derived::Scalar hi) {
  using S = typename Derived::Scalar;
  return (x - lo) / (hi - lo) * S(2) - S(1);
}

template <typename Derived>
auto denormalize(const Eigen::ArrayBase<Derived>& s, typename Derived::Scalar lo,
                 typename Derived::Scalar hi) {
  using S = typename Derived::Scalar;
  return (s + S(1)) / S(2) * (hi - lo) + lo;
}

}  // namespace hyst
