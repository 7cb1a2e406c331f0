#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hyst/cells.hpp"
#include "hyst/normalization.hpp"
#include "hyst/trace.hpp"

namespace hyst {

struct TrainConfig {
  Index hidden = 32;
  double lr = 0.01;
  int epochs = 10000;
  double dt = 0.05;
  std::uint64_t seed = 0;
  // Global-norm gradient clipping; off unless set. Diagnostic use only.
  std::optional<double> clip_norm;

  void validate() const;
};

// Teacher-forced sequence: step j consumes (H_j, B_{j-1}) and targets B_j,
// all in normalized units. inputs holds 2 values per step.
struct TrainingPairs {
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
};

TrainingPairs build_training_pairs(const HysteresisTrace& trace, const NormStats& norm);

struct TrainReport {
  CellKind kind = CellKind::hystrnn;
  std::vector<double> loss;  // one entry per epoch, before that epoch's update
  CellParams<double> params;
  NormStats norm;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Full-sequence BPTT with one Adam step per epoch. Hidden state restarts at
// zero every epoch. Throws NumericError if the loss or a gradient becomes
// non-finite.
TrainReport train(CellKind kind, const HysteresisTrace& trace, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Same loop starting from given parameters and prepared pairs.
TrainReport train_from(CellParams<double> initial, const NormStats& norm, const TrainingPairs& pairs,
                       const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// MSE of the unrolled teacher-forced sequence. When `grads` is non-null it
// receives d(loss)/d(tensor) for every parameter tensor.
template <typename Scalar>
Scalar sequence_loss(ad::Tape<Scalar>& tape, const CellParams<Scalar>& params, const TrainingPairs& pairs,
                     std::vector<ad::Tensor<Scalar>>* grads = nullptr);

// Normalized one-step-ahead predictions with ground-truth B_{j-1} inputs.
std::vector<double> teacher_forced_predictions(const CellParams<double>& params, const TrainingPairs& pairs);

void write_loss_history(const std::filesystem::path& path, std::span<const double> loss);
std::vector<double> read_loss_history(const std::filesystem::path& path);

}  // namespace hyst
