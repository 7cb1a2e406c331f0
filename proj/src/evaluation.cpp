#include "hyst/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hyst/errors.hpp"
#include "hyst/metrics.hpp"
#include "hyst/training.hpp"

namespace hyst {

std::string_view to_string(StateMode m) { return m == StateMode::cold ? "cold" : "warm"; }

std::optional<StateMode> parse_state_mode(std::string_view s) {
  if (s == "cold") return StateMode::cold;
  if (s == "warm") return StateMode::warm;
  return std::nullopt;
}

namespace {

// Final state after a teacher-forced pass over the warm-up trace, recorded on `tape`.
CellState<double> warm_state(ad::Tape<double>& tape, const BoundCell<double>& cell, const HysteresisTrace& trace,
                             const NormStats& norm) {
  const auto pairs = build_training_pairs(trace, norm);
  auto state = zero_state(tape, cell);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    state = step(cell, state, tape.constant({pairs.inputs[2 * j], pairs.inputs[2 * j + 1]}));
  }
  return state;
}

}  // namespace

std::vector<double> rollout(const CellParams<double>& params, const NormStats& norm, std::span<const double> h_seq,
                            double seed_b, const RolloutOptions& opts) {
  if (h_seq.empty()) throw std::invalid_argument("rollout: empty H sequence");
  norm.validate();
  ad::Tape<double> tape;
  const auto cell = bind(tape, params, false);
  CellState<double> state;
  if (opts.mode == StateMode::warm) {
    if (opts.warmup == nullptr) throw ConfigError("rollout: warm mode needs the training trace");
    state = warm_state(tape, cell, *opts.warmup, norm);
  } else {
    state = zero_state(tape, cell);
  }

  std::vector<double> out;
  out.reserve(h_seq.size());
  out.push_back(seed_b);
  double prev = normalize(seed_b, norm.b_min, norm.b_max);
  for (std::size_t k = 1; k < h_seq.size(); ++k) {
    const auto u = tape.constant({normalize(h_seq[k], norm.h_min, norm.h_max), prev});
    state = step(cell, state, u);
    const double next = readout(cell, state).scalar();
    if (!std::isfinite(next)) {
      throw NumericError(std::string(to_string(params.kind)) + ": non-finite prediction at position " +
                         std::to_string(k));
    }
    out.push_back(denormalize(next, norm.b_min, norm.b_max));
    prev = next;
  }
  return out;
}

RolloutResult rollout(const CellParams<double>& params, const NormStats& norm, const HysteresisTrace& test,
                      const RolloutOptions& opts) {
  test.validate();
  RolloutResult r;
  r.h = test.h;
  r.b_true = test.b;
  r.b_pred = rollout(params, norm, test.h, test.b.front(), opts);
  return r;
}

MetricsRow score(std::string curve, CellKind cell, std::span<const double> pred, std::span<const double> truth) {
  const auto p = as_vector(pred);
  const auto t = as_vector(truth);
  MetricsRow row;
  row.curve = std::move(curve);
  row.cell = cell;
  row.rel_l2 = rel_l2(p, t);
  row.explained_variance = explained_variance(p, t);
  row.max_error = max_error(p, t);
  row.mean_abs_error = mean_abs_error(p, t);
  return row;
}

const MetricsRow& ExperimentEvaluation::row(Curve c, CellKind k) const {
  for (const auto& r : rows) {
    if (r.curve == to_string(c) && r.cell == k) return r;
  }
  throw std::out_of_range("no metrics row for " + std::string(to_string(c)) + "/" + std::string(to_string(k)));
}

ExperimentEvaluation evaluate_experiment(const ExperimentData& data, std::span<const TrainedModel> models,
                                         StateMode mode) {
  ExperimentEvaluation ev;
  for (Curve c : test_curves()) {
    const auto& test = data[c];
    for (const auto& m : models) {
      RolloutOptions opts{mode, &data.major};
      auto r = rollout(m.params, m.norm, test, opts);
      ev.rows.push_back(score(std::string(to_string(c)), m.params.kind, r.b_pred, r.b_true));

      std::vector<double> pred_n(r.b_pred.size());
      std::vector<double> true_n(r.b_true.size());
      for (std::size_t i = 0; i < pred_n.size(); ++i) {
        pred_n[i] = normalize(r.b_pred[i], m.norm.b_min, m.norm.b_max);
        true_n[i] = normalize(r.b_true[i], m.norm.b_min, m.norm.b_max);
      }
      ev.normalized_rows.push_back(score(std::string(to_string(c)), m.params.kind, pred_n, true_n));
      ev.rollouts.emplace(std::make_pair(c, m.params.kind), std::move(r));
    }
  }
  return ev;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows) {
  auto out = create_new_file(path);
  out << "curve,cell,rel_l2,explained_variance,max_error,mean_abs_error\n";
  for (const auto& r : rows) {
    out << r.curve << ',' << to_string(r.cell) << ',' << format_exact(r.rel_l2) << ','
        << (r.explained_variance ? format_exact(*r.explained_variance) : std::string("undefined")) << ','
        << format_exact(r.max_error) << ',' << format_exact(r.mean_abs_error) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  const std::vector<std::string> header{"curve", "cell", "rel_l2", "explained_variance", "max_error",
                                        "mean_abs_error"};
  if (!std::getline(in, line) || split_csv_line(line) != header) {
    throw ConfigError(path.string() + ": unexpected header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto c = split_csv_line(line);
    if (c.size() != header.size()) throw ConfigError(path.string() + ": malformed row");
    MetricsRow r;
    r.curve = c[0];
    const auto kind = parse_cell_kind(c[1]);
    if (!kind) throw ConfigError(path.string() + ": unknown cell '" + c[1] + "'");
    r.cell = *kind;
    r.rel_l2 = parse_double(c[2], path.string());
    if (c[3] != "undefined") r.explained_variance = parse_double(c[3], path.string());
    r.max_error = parse_double(c[4], path.string());
    r.mean_abs_error = parse_double(c[5], path.string());
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hyst
