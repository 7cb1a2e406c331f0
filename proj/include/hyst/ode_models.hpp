#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace hyst {

// dB = a|dH|(bH - B) + c dH
template <typename Scalar>
struct DuhemParams {
  Scalar a = 1;
  Scalar b = 1;
  Scalar c = 0;
};

// dB = alpha dH - beta |dH| B |B|^(n-1) - gamma dH |B|^n
template <typename Scalar>
struct BoucWenParams {
  Scalar alpha = 1;
  Scalar beta = 0.5;
  Scalar gamma = 0.5;
  Scalar n = 1;
};

namespace detail {

template <typename Scalar>
void check_drive(std::span<const Scalar> h, Scalar b0) {
  if (h.size() < 2) throw std::invalid_argument("ode model: need at least two H samples");
  if (!std::isfinite(b0)) throw std::invalid_argument("ode model: non-finite initial B");
  for (auto v : h) {
    if (!std::isfinite(v)) throw std::invalid_argument("ode model: non-finite H sample");
  }
}

}  // namespace detail

// Forward Euler on the sample index grid. The rate dH over step k-1 -> k is
// the backward difference H_k - H_{k-1}; the state terms use step k-1.
template <typename Scalar>
std::vector<Scalar> simulate_duhem(const DuhemParams<Scalar>& p, std::span<const Scalar> h, Scalar b0) {
  detail::check_drive(h, b0);
  if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c)) {
    throw std::invalid_argument("duhem: non-finite parameter");
  }
  std::vector<Scalar> b(h.size());
  b[0] = b0;
  for (std::size_t k = 1; k < h.size(); ++k) {
    const Scalar dh = h[k] - h[k - 1];
    b[k] = b[k - 1] + p.a * std::abs(dh) * (p.b * h[k - 1] - b[k - 1]) + p.c * dh;
  }
  return b;
}

template <typename Scalar>
std::vector<Scalar> simulate_boucwen(const BoucWenParams<Scalar>& p, std::span<const Scalar> h, Scalar b0) {
  detail::check_drive(h, b0);
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !std::isfinite(p.gamma) || !std::isfinite(p.n)) {
    throw std::invalid_argument("bouc-wen: non-finite parameter");
  }
  if (!(p.n >= 1)) throw std::invalid_argument("bouc-wen: exponent n must be >= 1");
  std::vector<Scalar> b(h.size());
  b[0] = b0;
  for (std::size_t k = 1; k < h.size(); ++k) {
    const Scalar dh = h[k] - h[k - 1];
    const Scalar prev = b[k - 1];
    const Scalar mag = std::abs(prev);
    b[k] = prev + p.alpha * dh - p.beta * std::abs(dh) * prev * std::pow(mag, p.n - 1) -
           p.gamma * dh * std::pow(mag, p.n);
  }
  return b;
}

}  // namespace hyst
