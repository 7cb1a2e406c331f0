#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hyst/tape.hpp"
#include "hyst/tensor.hpp"

namespace hyst {

using ad::Index;

enum class CellKind { hystrnn, rnn, lstm, gru };

std::string_view to_string(CellKind kind);
std::optional<CellKind> parse_cell_kind(std::string_view name);
std::span<const CellKind> all_cell_kinds();

// Every cell consumes (H_j, B_{j-1}) per step.
inline constexpr Index kInputWidth = 2;

// Tensor slots per cell kind. Order here is the order in CellParams::tensors
// and in checkpoint files.
namespace slot {
namespace hystrnn {
enum : std::size_t { W1, W2, Wc1, Wc2, V1, V2, b1, b2, Q, count };
}
namespace rnn {
enum : std::size_t { W, U, b, Q, count };
}
namespace lstm {
enum : std::size_t { Wi, Wf, Wg, Wo, Ui, Uf, Ug, Uo, bi, bf, bg, bo, Q, count };
}
namespace gru {
enum : std::size_t { Wr, Wz, Wn, Ur, Uz, Un, br, bz, bn, bhn, Q, count };
}
}  // namespace slot

std::span<const std::string_view> tensor_names(CellKind kind);

// Weights of one recurrent cell plus its linear readout. For HystRNN `dt` is
// the explicit-scheme step in (0, 1); the baselines ignore it.
template <typename Scalar>
struct CellParams {
  CellKind kind = CellKind::hystrnn;
  Index hidden = 0;
  double dt = 0.05;
  std::vector<ad::Tensor<Scalar>> tensors;

  ad::Tensor<Scalar>& operator[](std::size_t i) { return tensors[i]; }
  const ad::Tensor<Scalar>& operator[](std::size_t i) const { return tensors[i]; }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }

  template <typename To>
  CellParams<To> cast() const {
    CellParams<To> out{kind, hidden, dt, {}};
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<To>());
    return out;
  }
};

// Zero-filled parameters with the correct shapes for `kind`.
template <typename Scalar>
CellParams<Scalar> zero_params(CellKind kind, Index hidden, double dt = 0.05);

// Weights uniform in [-1/sqrt(m), 1/sqrt(m)], biases zero, deterministic in seed.
CellParams<double> init_params(CellKind kind, Index hidden, std::uint64_t seed, double dt = 0.05);

// Throws std::invalid_argument on inconsistent shapes or dt outside (0, 1).
template <typename Scalar>
void validate(const CellParams<Scalar>& params);

// Flattened view used by optimizers and gradient checks.
template <typename Scalar>
std::vector<Scalar> flatten(const CellParams<Scalar>& params);
template <typename Scalar>
void unflatten(std::span<const Scalar> flat, CellParams<Scalar>& params);

// Parameters registered as leaves on a tape.
template <typename Scalar>
struct BoundCell {
  const CellParams<Scalar>* params = nullptr;
  std::vector<ad::Var<Scalar>> vars;

  ad::Var<Scalar> operator[](std::size_t i) const { return vars[i]; }
  CellKind kind() const { return params->kind; }
};

template <typename Scalar>
BoundCell<Scalar> bind(ad::Tape<Scalar>& tape, const CellParams<Scalar>& params, bool trainable = true);

// Recurrent state. HystRNN: (y, z). LSTM: (h, c). RNN and GRU use `h` only
// and leave `c` as an empty handle.
template <typename Scalar>
struct CellState {
  ad::Var<Scalar> h;
  ad::Var<Scalar> c;
};

template <typename Scalar>
CellState<Scalar> zero_state(ad::Tape<Scalar>& tape, const BoundCell<Scalar>& cell);

// State built from stored values, e.g. to warm-start a rollout.
template <typename Scalar>
CellState<Scalar> constant_state(ad::Tape<Scalar>& tape, const CellState<Scalar>& from);

template <typename Scalar>
CellState<Scalar> hystrnn_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u);
template <typename Scalar>
CellState<Scalar> rnn_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u);
template <typename Scalar>
CellState<Scalar> lstm_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u);
template <typename Scalar>
CellState<Scalar> gru_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u);

// Dispatch on cell.kind().
template <typename Scalar>
CellState<Scalar> step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u);

// B̂ = Q·h (Q·y for HystRNN); a length-1 node.
template <typename Scalar>
ad::Var<Scalar> readout(const BoundCell<Scalar>& cell, const CellState<Scalar>& s);

}  // namespace hyst
