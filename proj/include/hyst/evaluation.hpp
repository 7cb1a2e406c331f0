#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyst/cells.hpp"
#include "hyst/normalization.hpp"
#include "hyst/schedule.hpp"
#include "hyst/trace.hpp"

namespace hyst {

// Hidden state at the start of a rollout: zeros, or the state reached after
// a teacher-forced pass over the training loop.
enum class StateMode { cold, warm };

std::string_view to_string(StateMode m);
std::optional<StateMode> parse_state_mode(std::string_view s);

struct RolloutOptions {
  StateMode mode = StateMode::cold;
  const HysteresisTrace* warmup = nullptr;  // required for warm mode
};

struct RolloutResult {
  std::vector<double> h;
  std::vector<double> b_pred;
  std::vector<double> b_true;
};

// Closed-loop prediction. Step k >= 1 consumes (H_k, B̂_{k-1}) with
// B̂_0 = seed_b; all arithmetic happens in normalized units and the result is
// denormalized. Throws NumericError at the first non-finite prediction.
std::vector<double> rollout(const CellParams<double>& params, const NormStats& norm, std::span<const double> h_seq,
                            double seed_b, const RolloutOptions& opts = {});

// Seeds with test.b[0]; b_true is kept for scoring only.
RolloutResult rollout(const CellParams<double>& params, const NormStats& norm, const HysteresisTrace& test,
                      const RolloutOptions& opts = {});

struct MetricsRow {
  std::string curve;
  CellKind cell = CellKind::hystrnn;
  double rel_l2 = 0.0;
  std::optional<double> explained_variance;  // nullopt: zero-variance truth
  double max_error = 0.0;
  double mean_abs_error = 0.0;
};

MetricsRow score(std::string curve, CellKind cell, std::span<const double> pred, std::span<const double> truth);

struct TrainedModel {
  CellParams<double> params;
  NormStats norm;
};

struct ExperimentEvaluation {
  std::vector<MetricsRow> rows;             // tesla
  std::vector<MetricsRow> normalized_rows;  // same rollouts, normalized units
  std::map<std::pair<Curve, CellKind>, RolloutResult> rollouts;

  const MetricsRow& row(Curve c, CellKind k) const;
};

// One row per (test curve, model), curves in forc1, forc2, minor1, minor2 order.
ExperimentEvaluation evaluate_experiment(const ExperimentData& data, std::span<const TrainedModel> models,
                                         StateMode mode = StateMode::cold);

// Header: curve,cell,rel_l2,explained_variance,max_error,mean_abs_error.
// An undefined explained variance is written as "undefined".
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

}  // namespace hyst
