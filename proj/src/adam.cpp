#include "hyst/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hyst {

AdamState AdamState::zeros_like(std::span<const ad::Tensor<double>> params) {
  AdamState s;
  for (const auto& p : params) {
    auto z = p.rank() == 1 ? ad::Tensor<double>::vector(p.rows()) : ad::Tensor<double>::matrix(p.rows(), p.cols());
    s.m.push_back(z);
    s.v.push_back(z);
  }
  return s;
}

void adam_update(std::span<ad::Tensor<double>> params, std::span<const ad::Tensor<double>> grads,
                 AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam: parameter, gradient and state counts differ");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.m[i])) {
      throw std::invalid_argument("adam: shape mismatch at tensor " + std::to_string(i));
    }
    auto g = grads[i].flat().array();
    auto m = state.m[i].flat().array();
    auto v = state.v[i].flat().array();
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
    params[i].flat().array() -= cfg.lr * (m / c1) / ((v / c2).sqrt() + cfg.eps);
  }
}

}  // namespace hyst
