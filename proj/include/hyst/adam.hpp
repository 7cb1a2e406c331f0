#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyst/tensor.hpp"

namespace hyst {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment accumulators mirroring the parameter tensors.
struct AdamState {
  std::vector<ad::Tensor<double>> m;
  std::vector<ad::Tensor<double>> v;
  std::int64_t t = 0;

  static AdamState zeros_like(std::span<const ad::Tensor<double>> params);
};

// One bias-corrected Adam step applied in place.
void adam_update(std::span<ad::Tensor<double>> params, std::span<const ad::Tensor<double>> grads,
                 AdamState& state, const AdamConfig& cfg);

}  // namespace hyst
