#include "hyst/cells.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace hyst {

namespace {

constexpr std::array<CellKind, 4> kAllKinds = {CellKind::hystrnn, CellKind::rnn, CellKind::lstm,
                                               CellKind::gru};

constexpr std::array<std::string_view, slot::hystrnn::count> kHystNames = {
    "W1", "W2", "Wc1", "Wc2", "V1", "V2", "b1", "b2", "Q"};
constexpr std::array<std::string_view, slot::rnn::count> kRnnNames = {"W", "U", "b", "Q"};
constexpr std::array<std::string_view, slot::lstm::count> kLstmNames = {
    "Wi", "Wf", "Wg", "Wo", "Ui", "Uf", "Ug", "Uo", "bi", "bf", "bg", "bo", "Q"};
constexpr std::array<std::string_view, slot::gru::count> kGruNames = {
    "Wr", "Wz", "Wn", "Ur", "Uz", "Un", "br", "bz", "bn", "bhn", "Q"};

struct SlotShape {
  int rank;
  Index rows;
  Index cols;
};

// Shape of every slot, in slot order.
std::vector<SlotShape> slot_shapes(CellKind kind, Index m) {
  const SlotShape square{2, m, m};
  const SlotShape input{2, m, kInputWidth};
  const SlotShape bias{1, m, 1};
  const SlotShape out{2, 1, m};
  switch (kind) {
    case CellKind::hystrnn:
      return {square, square, square, square, input, input, bias, bias, out};
    case CellKind::rnn:
      return {input, square, bias, out};
    case CellKind::lstm:
      return {input, input, input, input, square, square, square, square, bias, bias, bias, bias, out};
    case CellKind::gru:
      return {input, input, input, square, square, square, bias, bias, bias, bias, out};
  }
  throw std::invalid_argument("unknown cell kind");
}

}  // namespace

std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::hystrnn:
      return "hystrnn";
    case CellKind::rnn:
      return "rnn";
    case CellKind::lstm:
      return "lstm";
    case CellKind::gru:
      return "gru";
  }
  return "unknown";
}

std::optional<CellKind> parse_cell_kind(std::string_view name) {
  for (auto k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::span<const CellKind> all_cell_kinds() { return kAllKinds; }

std::span<const std::string_view> tensor_names(CellKind kind) {
  switch (kind) {
    case CellKind::hystrnn:
      return kHystNames;
    case CellKind::rnn:
      return kRnnNames;
    case CellKind::lstm:
      return kLstmNames;
    case CellKind::gru:
      return kGruNames;
  }
  throw std::invalid_argument("unknown cell kind");
}

template <typename Scalar>
CellParams<Scalar> zero_params(CellKind kind, Index hidden, double dt) {
  if (hidden < 1) throw std::invalid_argument("hidden dimension must be positive");
  CellParams<Scalar> p{kind, hidden, dt, {}};
  for (const auto& s : slot_shapes(kind, hidden)) {
    p.tensors.push_back(s.rank == 1 ? ad::Tensor<Scalar>::vector(s.rows)
                                    : ad::Tensor<Scalar>::matrix(s.rows, s.cols));
  }
  return p;
}

CellParams<double> init_params(CellKind kind, Index hidden, std::uint64_t seed, double dt) {
  auto p = zero_params<double>(kind, hidden, dt);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& t : p.tensors) {
    if (t.rank() == 1) continue;  // biases stay zero
    for (Index i = 0; i < t.size(); ++i) t(i) = dist(rng);
  }
  validate(p);
  return p;
}

template <typename Scalar>
void validate(const CellParams<Scalar>& params) {
  const auto shapes = slot_shapes(params.kind, params.hidden);
  if (params.tensors.size() != shapes.size()) {
    throw std::invalid_argument("cell parameters: expected " + std::to_string(shapes.size()) +
                                " tensors for " + std::string(to_string(params.kind)));
  }
  const auto names = tensor_names(params.kind);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& t = params.tensors[i];
    if (t.rank() != shapes[i].rank || t.rows() != shapes[i].rows || t.cols() != shapes[i].cols) {
      throw std::invalid_argument("cell parameters: tensor " + std::string(names[i]) +
                                  " has shape " + t.shape_string());
    }
  }
  if (params.kind == CellKind::hystrnn && !(params.dt > 0.0 && params.dt < 1.0)) {
    throw std::invalid_argument("cell parameters: dt must lie in (0, 1)");
  }
}

template <typename Scalar>
std::vector<Scalar> flatten(const CellParams<Scalar>& params) {
  std::vector<Scalar> out;
  out.reserve(static_cast<std::size_t>(params.parameter_count()));
  for (const auto& t : params.tensors) out.insert(out.end(), t.data(), t.data() + t.size());
  return out;
}

template <typename Scalar>
void unflatten(std::span<const Scalar> flat, CellParams<Scalar>& params) {
  if (static_cast<Index>(flat.size()) != params.parameter_count()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  std::size_t pos = 0;
  for (auto& t : params.tensors) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t.size(), t.data());
    pos += static_cast<std::size_t>(t.size());
  }
}

template <typename Scalar>
BoundCell<Scalar> bind(ad::Tape<Scalar>& tape, const CellParams<Scalar>& params, bool trainable) {
  BoundCell<Scalar> cell;
  cell.params = &params;
  cell.vars.reserve(params.tensors.size());
  for (const auto& t : params.tensors) {
    cell.vars.push_back(trainable ? tape.variable(t) : tape.constant(t));
  }
  return cell;
}

template <typename Scalar>
CellState<Scalar> zero_state(ad::Tape<Scalar>& tape, const BoundCell<Scalar>& cell) {
  const Index m = cell.params->hidden;
  switch (cell.kind()) {
    case CellKind::hystrnn:
    case CellKind::lstm:
      return {tape.zeros(m), tape.zeros(m)};
    case CellKind::rnn:
    case CellKind::gru:
      return {tape.zeros(m), {}};
  }
  throw std::invalid_argument("unknown cell kind");
}

template <typename Scalar>
CellState<Scalar> constant_state(ad::Tape<Scalar>& tape, const CellState<Scalar>& from) {
  CellState<Scalar> s;
  s.h = tape.constant(from.h.value());
  if (from.c.valid()) s.c = tape.constant(from.c.value());
  return s;
}

template <typename Scalar>
CellState<Scalar> hystrnn_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s,
                               ad::Var<Scalar> u) {
  namespace k = slot::hystrnn;
  const Scalar dt = static_cast<Scalar>(cell.params->dt);
  const auto& y = s.h;
  const auto& z = s.c;
  const auto first = tanh(cell[k::W1] * y + cell[k::Wc1] * z + cell[k::V1] * u + cell[k::b1]);
  const auto second = tanh(cell[k::W2] * abs_square(y) + cell[k::Wc2] * abs_square(z) +
                           cell[k::V2] * abs_square(u) + cell[k::b2]);
  const auto z_next = z + dt * first + dt * second;
  const auto y_next = y + dt * z_next;
  return {y_next, z_next};
}

template <typename Scalar>
CellState<Scalar> rnn_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u) {
  namespace k = slot::rnn;
  return {tanh(cell[k::W] * u + cell[k::U] * s.h + cell[k::b]), {}};
}

template <typename Scalar>
CellState<Scalar> lstm_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u) {
  namespace k = slot::lstm;
  const auto i = sigmoid(cell[k::Wi] * u + cell[k::Ui] * s.h + cell[k::bi]);
  const auto f = sigmoid(cell[k::Wf] * u + cell[k::Uf] * s.h + cell[k::bf]);
  const auto g = tanh(cell[k::Wg] * u + cell[k::Ug] * s.h + cell[k::bg]);
  const auto o = sigmoid(cell[k::Wo] * u + cell[k::Uo] * s.h + cell[k::bo]);
  const auto c_next = cwise_product(f, s.c) + cwise_product(i, g);
  return {cwise_product(o, tanh(c_next)), c_next};
}

template <typename Scalar>
CellState<Scalar> gru_step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u) {
  namespace k = slot::gru;
  const auto r = sigmoid(cell[k::Wr] * u + cell[k::Ur] * s.h + cell[k::br]);
  const auto z = sigmoid(cell[k::Wz] * u + cell[k::Uz] * s.h + cell[k::bz]);
  const auto n = tanh(cell[k::Wn] * u + cell[k::bn] + cwise_product(r, cell[k::Un] * s.h + cell[k::bhn]));
  // (1 - z) * n + z * h
  return {n + cwise_product(z, s.h - n), {}};
}

template <typename Scalar>
CellState<Scalar> step(const BoundCell<Scalar>& cell, const CellState<Scalar>& s, ad::Var<Scalar> u) {
  switch (cell.kind()) {
    case CellKind::hystrnn:
      return hystrnn_step(cell, s, u);
    case CellKind::rnn:
      return rnn_step(cell, s, u);
    case CellKind::lstm:
      return lstm_step(cell, s, u);
    case CellKind::gru:
      return gru_step(cell, s, u);
  }
  throw std::invalid_argument("unknown cell kind");
}

template <typename Scalar>
ad::Var<Scalar> readout(const BoundCell<Scalar>& cell, const CellState<Scalar>& s) {
  return cell.vars.back() * s.h;
}

#define HYST_INSTANTIATE_CELLS(S)                                                                  \
  template CellParams<S> zero_params<S>(CellKind, Index, double);                                 \
  template void validate<S>(const CellParams<S>&);                                                \
  template std::vector<S> flatten<S>(const CellParams<S>&);                                       \
  template void unflatten<S>(std::span<const S>, CellParams<S>&);                                 \
  template BoundCell<S> bind<S>(ad::Tape<S>&, const CellParams<S>&, bool);                        \
  template CellState<S> zero_state<S>(ad::Tape<S>&, const BoundCell<S>&);                         \
  template CellState<S> constant_state<S>(ad::Tape<S>&, const CellState<S>&);                     \
  template CellState<S> hystrnn_step<S>(const BoundCell<S>&, const CellState<S>&, ad::Var<S>);    \
  template CellState<S> rnn_step<S>(const BoundCell<S>&, const CellState<S>&, ad::Var<S>);        \
  template CellState<S> lstm_step<S>(const BoundCell<S>&, const CellState<S>&, ad::Var<S>);       \
  template CellState<S> gru_step<S>(const BoundCell<S>&, const CellState<S>&, ad::Var<S>);        \
  template CellState<S> step<S>(const BoundCell<S>&, const CellState<S>&, ad::Var<S>);            \
  template ad::Var<S> readout<S>(const BoundCell<S>&, const CellState<S>&);

HYST_INSTANTIATE_CELLS(double)
HYST_INSTANTIATE_CELLS(long double)

#undef HYST_INSTANTIATE_CELLS

}  // namespace hyst
