#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "hyst/training.hpp"

namespace hyst {

template <typename Scalar>
struct GradCheckResult {
  Scalar max_rel_error = 0;
  std::size_t worst_index = 0;
};

// Five-point central differences per coordinate against `grad`:
//   (-f(p + 2eps) + 8f(p + eps) - 8f(p - eps) + f(p - 2eps)) / 12eps.
// The fourth-order stencil permits a larger eps, which keeps round-off small
// on near-zero gradient entries. Relative error uses
// max(|g_fd|, |g|, 1e-12) as denominator.
template <typename Scalar, typename F>
GradCheckResult<Scalar> grad_check(F&& f, std::span<const Scalar> params, std::span<const Scalar> grad,
                                   Scalar eps) {
  if (params.size() != grad.size()) throw std::invalid_argument("grad_check: size mismatch");
  std::vector<Scalar> p(params.begin(), params.end());
  GradCheckResult<Scalar> r;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Scalar saved = p[i];
    const auto at = [&](Scalar offset) {
      p[i] = saved + offset;
      return f(std::span<const Scalar>(p));
    };
    const Scalar fd = (at(-2 * eps) - 8 * at(-eps) + 8 * at(eps) - at(2 * eps)) / (12 * eps);
    p[i] = saved;
    const Scalar denom = std::max({std::abs(fd), std::abs(grad[i]), Scalar(1e-12)});
    const Scalar err = std::abs(fd - grad[i]) / denom;
    if (err > r.max_rel_error) r = {err, i};
  }
  return r;
}

// Checks the full-BPTT gradient of the teacher-forced sequence loss.
template <typename Scalar>
GradCheckResult<Scalar> sequence_grad_check(const CellParams<Scalar>& params, const TrainingPairs& pairs,
                                            Scalar eps) {
  ad::Tape<Scalar> tape;
  std::vector<ad::Tensor<Scalar>> grads;
  sequence_loss<Scalar>(tape, params, pairs, &grads);
  CellParams<Scalar> g = params;
  g.tensors = grads;
  const auto flat_grad = flatten(g);
  const auto flat = flatten(params);

  CellParams<Scalar> work = params;
  const auto loss = [&](std::span<const Scalar> p) {
    unflatten(p, work);
    ad::Tape<Scalar> t;
    return sequence_loss<Scalar>(t, work, pairs);
  };
  return grad_check<Scalar>(loss, flat, flat_grad, eps);
}

}  // namespace hyst
