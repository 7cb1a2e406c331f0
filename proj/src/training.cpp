#include "hyst/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hyst/adam.hpp"
#include "hyst/errors.hpp"

namespace hyst {

void TrainConfig::validate() const {
  if (hidden < 1) throw ConfigError("hidden dimension must be positive");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(dt > 0.0 && dt < 1.0)) throw ConfigError("dt must lie in (0, 1)");
  if (clip_norm && !(*clip_norm > 0.0)) throw ConfigError("clip norm must be positive");
}

NormStats fit_norm(const HysteresisTrace& trace) {
  trace.validate();
  const auto [h_lo, h_hi] = std::minmax_element(trace.h.begin(), trace.h.end());
  const auto [b_lo, b_hi] = std::minmax_element(trace.b.begin(), trace.b.end());
  NormStats s{*h_lo, *h_hi, *b_lo, *b_hi};
  s.validate();
  return s;
}

TrainingPairs build_training_pairs(const HysteresisTrace& trace, const NormStats& norm) {
  trace.validate();
  if (trace.size() < 2) throw std::invalid_argument("training pairs need a trace of length >= 2");
  norm.validate();
  TrainingPairs p;
  const std::size_t n = trace.size() - 1;
  p.inputs.reserve(2 * n);
  p.targets.reserve(n);
  for (std::size_t j = 1; j < trace.size(); ++j) {
    p.inputs.push_back(normalize(trace.h[j], norm.h_min, norm.h_max));
    p.inputs.push_back(normalize(trace.b[j - 1], norm.b_min, norm.b_max));
    p.targets.push_back(normalize(trace.b[j], norm.b_min, norm.b_max));
  }
  return p;
}

namespace {

template <typename Scalar>
ad::Var<Scalar> unroll(ad::Tape<Scalar>& tape, const BoundCell<Scalar>& cell, const TrainingPairs& pairs) {
  std::vector<ad::Var<Scalar>> outputs;
  outputs.reserve(pairs.size());
  auto state = zero_state(tape, cell);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto u = tape.constant({static_cast<Scalar>(pairs.inputs[2 * j]),
                                  static_cast<Scalar>(pairs.inputs[2 * j + 1])});
    state = step(cell, state, u);
    outputs.push_back(readout(cell, state));
  }
  return tape.concat(outputs);
}

}  // namespace

template <typename Scalar>
Scalar sequence_loss(ad::Tape<Scalar>& tape, const CellParams<Scalar>& params, const TrainingPairs& pairs,
                     std::vector<ad::Tensor<Scalar>>* grads) {
  if (pairs.size() == 0) throw std::invalid_argument("sequence_loss: no training pairs");
  tape.clear();
  const auto cell = bind(tape, params, grads != nullptr);
  const auto pred = unroll(tape, cell, pairs);
  std::vector<Scalar> target(pairs.targets.begin(), pairs.targets.end());
  const auto loss = mse_loss(pred, tape.constant(std::span<const Scalar>(target)));
  if (grads != nullptr) {
    tape.backward(loss);
    grads->clear();
    for (const auto& v : cell.vars) grads->push_back(tape.gradient(v));
  }
  return loss.scalar();
}

template double sequence_loss<double>(ad::Tape<double>&, const CellParams<double>&, const TrainingPairs&,
                                      std::vector<ad::Tensor<double>>*);
template long double sequence_loss<long double>(ad::Tape<long double>&, const CellParams<long double>&,
                                                const TrainingPairs&, std::vector<ad::Tensor<long double>>*);

std::vector<double> teacher_forced_predictions(const CellParams<double>& params, const TrainingPairs& pairs) {
  ad::Tape<double> tape;
  const auto cell = bind(tape, params, false);
  const auto pred = unroll(tape, cell, pairs);
  const auto v = tape.values(pred);
  return {v.begin(), v.end()};
}

TrainReport train_from(CellParams<double> initial, const NormStats& norm, const TrainingPairs& pairs,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  validate(initial);
  const auto start = std::chrono::steady_clock::now();

  TrainReport report;
  report.kind = initial.kind;
  report.norm = norm;
  report.seed = cfg.seed;
  report.params = std::move(initial);
  report.loss.reserve(static_cast<std::size_t>(cfg.epochs));

  AdamState adam = AdamState::zeros_like(report.params.tensors);
  const AdamConfig adam_cfg{cfg.lr};
  ad::Tape<double> tape;
  std::vector<ad::Tensor<double>> grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = sequence_loss(tape, report.params, pairs, &grads);
    bool finite = std::isfinite(loss);
    double sq_norm = 0.0;
    for (const auto& g : grads) {
      finite = finite && g.all_finite();
      sq_norm += g.flat().squaredNorm();
    }
    if (!finite) {
      throw NumericError(std::string(to_string(report.kind)) + ": non-finite loss or gradient at epoch " +
                         std::to_string(epoch));
    }
    if (cfg.clip_norm && std::sqrt(sq_norm) > *cfg.clip_norm) {
      const double s = *cfg.clip_norm / std::sqrt(sq_norm);
      for (auto& g : grads) g.flat() *= s;
    }
    report.loss.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);
    adam_update(report.params.tensors, grads, adam, adam_cfg);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainReport train(CellKind kind, const HysteresisTrace& trace, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const auto norm = fit_norm(trace);
  const auto pairs = build_training_pairs(trace, norm);
  return train_from(init_params(kind, cfg.hidden, cfg.seed, cfg.dt), norm, pairs, cfg, on_epoch);
}

void write_loss_history(const std::filesystem::path& path, std::span<const double> loss) {
  auto out = create_new_file(path);
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < loss.size(); ++i) out << i << ',' << format_exact(loss[i]) << '\n';
}

std::vector<double> read_loss_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"epoch", "loss"}) {
    throw ConfigError(path.string() + ": unexpected header");
  }
  std::vector<double> loss;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw ConfigError(path.string() + ": malformed row");
    loss.push_back(parse_double(cells[1], path.string()));
  }
  return loss;
}

}  // namespace hyst
