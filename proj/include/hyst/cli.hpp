#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hyst/evaluation.hpp"
#include "hyst/schedule.hpp"
#include "hyst/training.hpp"

namespace hyst::cli {

struct RunConfig {
  int experiment = 1;
  std::vector<CellKind> cells{CellKind::hystrnn, CellKind::rnn, CellKind::lstm, CellKind::gru};
  std::filesystem::path out = "runs";
  StateMode state = StateMode::cold;
  TrainConfig train;  // train.seed is the root seed
  int jobs = 1;
  bool verbose = false;

  void validate() const;
};

// Layout of one experiment's outputs:
//   <root>/data/exp<N>_<curve>.csv
//   <root>/models/<cell>.ckpt, <root>/models/<cell>-loss.csv
//   <root>/eval-<state>/metrics.csv, <curve>-<cell>.csv, <curve>-<cell>.svg
struct RunLayout {
  std::filesystem::path root;
  int experiment = 1;

  std::filesystem::path data(Curve c) const;
  std::filesystem::path checkpoint(CellKind k) const;
  std::filesystem::path loss(CellKind k) const;
  std::filesystem::path eval_dir(StateMode m) const;
};

// <out>/exp<N>-seed<S>
RunLayout run_layout(const RunConfig& cfg);

// Writes the five traces. Refuses to replace existing files.
ExperimentData cmd_generate(const RunConfig& cfg, const RunLayout& layout, std::ostream& log);

// Trains each requested cell on the major trace (generating the data first
// when it is missing) and writes checkpoints plus loss histories.
std::vector<TrainReport> cmd_train(const RunConfig& cfg, const RunLayout& layout, std::ostream& log);

// Closed-loop evaluation of the stored checkpoints on the four test curves.
ExperimentEvaluation cmd_evaluate(const RunConfig& cfg, const RunLayout& layout, std::ostream& log);

// generate, train, evaluate for each experiment into a fresh
// <out>/reproduce-NNN directory; returns that directory.
std::filesystem::path cmd_reproduce(const RunConfig& cfg, std::span<const int> experiments, std::ostream& log);

// Renders a trajectory file (H,B,B_pred), optionally with the training loop.
void cmd_plot(const std::filesystem::path& trajectory, const std::optional<std::filesystem::path>& training,
              const std::filesystem::path& svg, const std::string& title);

// Fixed-width table with one row per curve and rel_l2 / EV per cell.
std::string format_summary(int experiment, std::span<const MetricsRow> rows);

// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hyst::cli
