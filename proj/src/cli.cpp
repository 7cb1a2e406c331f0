#include "hyst/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hyst/checkpoint.hpp"
#include "hyst/errors.hpp"
#include "hyst/plot.hpp"
#include "hyst/preisach.hpp"

namespace hyst::cli {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  experiment_spec(experiment);
  if (cells.empty()) throw ConfigError("no cell kinds selected");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (out.empty()) throw ConfigError("output directory must not be empty");
  train.validate();
}

fs::path RunLayout::data(Curve c) const {
  return root / "data" / ("exp" + std::to_string(experiment) + "_" + std::string(to_string(c)) + ".csv");
}
fs::path RunLayout::checkpoint(CellKind k) const { return root / "models" / (std::string(to_string(k)) + ".ckpt"); }
fs::path RunLayout::loss(CellKind k) const { return root / "models" / (std::string(to_string(k)) + "-loss.csv"); }
fs::path RunLayout::eval_dir(StateMode m) const { return root / ("eval-" + std::string(to_string(m))); }

RunLayout run_layout(const RunConfig& cfg) {
  return {cfg.out / ("exp" + std::to_string(cfg.experiment) + "-seed" + std::to_string(cfg.train.seed)), cfg.experiment};
}

namespace {

void write_manifest(const fs::path& path, const RunConfig& cfg, std::string_view command) {
  auto f = create_new_file(path);
  f << "command " << command << '\n';
  f << "experiment " << cfg.experiment << '\n';
  f << "seed " << cfg.train.seed << '\n';
  f << "cells";
  for (auto k : cfg.cells) f << ' ' << to_string(k);
  f << '\n';
  f << "hidden " << cfg.train.hidden << '\n';
  f << "lr " << format_exact(cfg.train.lr) << '\n';
  f << "epochs " << cfg.train.epochs << '\n';
  f << "dt " << format_exact(cfg.train.dt) << '\n';
  f << "clip " << (cfg.train.clip_norm ? format_exact(*cfg.train.clip_norm) : std::string("none")) << '\n';
  f << "state " << to_string(cfg.state) << '\n';
}

ExperimentData load_data(const RunLayout& layout) {
  ExperimentData d;
  for (Curve c : all_curves()) d[c] = read_trace_csv(layout.data(c));
  return d;
}

bool data_present(const RunLayout& layout) {
  return std::all_of(all_curves().begin(), all_curves().end(),
                     [&](Curve c) { return fs::exists(layout.data(c)); });
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

ExperimentData cmd_generate(const RunConfig& cfg, const RunLayout& layout, std::ostream& log) {
  cfg.validate();
  const auto spec = experiment_spec(cfg.experiment);
  const auto plane = PreisachPlane::make({});
  auto data = generate_experiment(spec, plane);
  for (Curve c : all_curves()) {
    write_trace_csv(layout.data(c), data[c]);
    log << "wrote " << layout.data(c).string() << " (" << data[c].size() << " points)\n";
  }
  write_manifest(layout.root / "data" / "manifest.txt", cfg, "generate");
  return data;
}

std::vector<TrainReport> cmd_train(const RunConfig& cfg, const RunLayout& layout, std::ostream& log) {
  cfg.validate();
  if (!data_present(layout)) cmd_generate(cfg, layout, log);
  const auto major = read_trace_csv(layout.data(Curve::major));

  // Fail before spending any training time if outputs already exist.
  for (auto k : cfg.cells) {
    for (const auto& p : {layout.checkpoint(k), layout.loss(k)}) {
      if (fs::exists(p)) throw ConfigError("refusing to overwrite " + p.string());
    }
  }

  std::vector<TrainReport> reports(cfg.cells.size());
  std::mutex log_mutex;
  parallel_for(cfg.cells.size(), cfg.jobs, [&](std::size_t i) {
    const auto kind = cfg.cells[i];
    const int stride = std::max(1, cfg.train.epochs / 10);
    EpochCallback progress;
    if (cfg.verbose) {
      progress = [&, kind, stride](int epoch, double loss) {
        if (epoch % stride != 0) return;
        std::lock_guard lock(log_mutex);
        log << "  " << to_string(kind) << " epoch " << epoch << " loss " << fmt("%.6e", loss) << '\n';
      };
    }
    reports[i] = train(kind, major, cfg.train, progress);
    std::lock_guard lock(log_mutex);
    log << "trained " << to_string(kind) << ": final loss "
        << (reports[i].loss.empty() ? std::string("n/a") : fmt("%.6e", reports[i].loss.back())) << " in "
        << fmt("%.1f", reports[i].wall_seconds) << " s\n";
  });

  for (const auto& r : reports) {
    write_checkpoint(layout.checkpoint(r.kind), {r.params, r.norm, r.seed});
    write_loss_history(layout.loss(r.kind), r.loss);
  }
  write_manifest(layout.root / "models" / "manifest.txt", cfg, "train");
  return reports;
}

ExperimentEvaluation cmd_evaluate(const RunConfig& cfg, const RunLayout& layout, std::ostream& log) {
  cfg.validate();
  if (!data_present(layout)) {
    throw ConfigError("no data in " + (layout.root / "data").string() + "; run generate and train first");
  }
  const auto data = load_data(layout);
  std::vector<TrainedModel> models;
  for (auto k : cfg.cells) {
    const auto ck = read_checkpoint(layout.checkpoint(k));
    if (ck.params.kind != k) throw ConfigError(layout.checkpoint(k).string() + ": cell kind mismatch");
    models.push_back({ck.params, ck.norm});
  }

  auto ev = evaluate_experiment(data, models, cfg.state);
  const auto dir = layout.eval_dir(cfg.state);
  write_metrics_csv(dir / "metrics.csv", ev.rows);
  for (const auto& [key, r] : ev.rollouts) {
    const auto stem = std::string(to_string(key.first)) + "-" + std::string(to_string(key.second));
    write_trajectory_csv(dir / (stem + ".csv"), {data[key.first], r.b_pred});
    const std::vector<PlotSeries> series{
        {"training loop", "#9e9e9e", data.major.h, data.major.b, false},
        {"ground truth", "#1f77b4", r.h, r.b_true, false},
        {std::string(to_string(key.second)) + " prediction", "#d62728", r.h, r.b_pred, true},
    };
    auto svg = create_new_file(dir / (stem + ".svg"));
    svg << render_svg(series, "Experiment " + std::to_string(cfg.experiment) + ": " + stem);
  }
  write_manifest(dir / "manifest.txt", cfg, "evaluate");

  log << format_summary(cfg.experiment, ev.rows);
  if (cfg.verbose) {
    log << "normalized units:\n" << format_summary(cfg.experiment, ev.normalized_rows);
  }
  return ev;
}

fs::path cmd_reproduce(const RunConfig& cfg, std::span<const int> experiments, std::ostream& log) {
  cfg.validate();
  for (int id : experiments) experiment_spec(id);
  fs::create_directories(cfg.out);
  fs::path dir;
  for (int n = 1;; ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "reproduce-%03d", n);
    dir = cfg.out / name;
    if (fs::create_directory(dir)) break;
  }
  log << "reproduce into " << dir.string() << '\n';

  std::string summary;
  for (int id : experiments) {
    RunConfig c = cfg;
    c.experiment = id;
    c.out = dir;
    const auto layout = run_layout(c);
    log << "== experiment " << id << '\n';
    cmd_generate(c, layout, log);
    cmd_train(c, layout, log);
    const auto ev = cmd_evaluate(c, layout, log);
    summary += format_summary(id, ev.rows);
    summary += '\n';
  }
  auto f = create_new_file(dir / "summary.txt");
  f << summary;
  return dir;
}

void cmd_plot(const fs::path& trajectory, const std::optional<fs::path>& training, const fs::path& svg,
              const std::string& title) {
  const auto traj = read_trajectory_csv(trajectory);
  std::vector<PlotSeries> series;
  if (training) {
    const auto t = read_trace_csv(*training);
    series.push_back({"training loop", "#9e9e9e", t.h, t.b, false});
  }
  series.push_back({"ground truth", "#1f77b4", traj.truth.h, traj.truth.b, false});
  series.push_back({"prediction", "#d62728", traj.truth.h, traj.b_pred, true});
  auto f = create_new_file(svg);
  f << render_svg(series, title);
}

std::string format_summary(int experiment, std::span<const MetricsRow> rows) {
  std::vector<std::string> curves;
  std::vector<CellKind> cells;
  for (const auto& r : rows) {
    if (std::find(curves.begin(), curves.end(), r.curve) == curves.end()) curves.push_back(r.curve);
    if (std::find(cells.begin(), cells.end(), r.cell) == cells.end()) cells.push_back(r.cell);
  }
  std::ostringstream o;
  o << "experiment " << experiment << " (rel_l2 / explained variance)\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-8s", "curve");
  o << buf;
  for (auto k : cells) {
    std::snprintf(buf, sizeof buf, "  %-24s", std::string(to_string(k)).c_str());
    o << buf;
  }
  o << '\n';
  for (const auto& c : curves) {
    std::snprintf(buf, sizeof buf, "%-8s", c.c_str());
    o << buf;
    for (auto k : cells) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.curve == c && r.cell == k; });
      if (it == rows.end()) {
        std::snprintf(buf, sizeof buf, "  %-24s", "-");
      } else {
        const auto ev = it->explained_variance ? fmt("%.4f", *it->explained_variance) : std::string("undef");
        std::snprintf(buf, sizeof buf, "  %10.4f / %-11s", it->rel_l2, ev.c_str());
      }
      o << buf;
    }
    o << '\n';
  }
  return o.str();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hysteresis modelling with recurrent cells on synthetic Preisach data"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Configuration file with key = value lines; flags take precedence");

  RunConfig cfg;
  std::vector<std::string> cell_names{"all"};
  std::string state_name = "cold";
  std::string out_dir = "runs";
  double clip = 0.0;
  app.add_option("--experiment", cfg.experiment, "Experiment id (1-4)")->check(CLI::Range(1, 4));
  app.add_option("--cell", cell_names, "hystrnn, rnn, lstm, gru or all (comma separated)")->delimiter(',');
  app.add_option("--seed", cfg.train.seed, "Root seed");
  app.add_option("--out", out_dir, "Output root directory")->envname("HYSTRNN_OUT");
  app.add_option("--state", state_name, "Hidden state at rollout start: cold or warm");
  app.add_option("--epochs", cfg.train.epochs, "Training epochs");
  app.add_option("--lr", cfg.train.lr, "Adam learning rate");
  app.add_option("--hidden", cfg.train.hidden, "Hidden dimension m");
  app.add_option("--dt", cfg.train.dt, "HystRNN step size in (0, 1)");
  auto* clip_opt = app.add_option("--clip", clip, "Global gradient-norm clip (diagnostics only)");
  app.add_option("--jobs", cfg.jobs, "Cells trained in parallel");
  app.add_flag("-v,--verbose", cfg.verbose, "Progress output and normalized-unit metrics");

  auto* generate = app.add_subcommand("generate", "Write the five synthetic traces of one experiment");
  auto* train_cmd = app.add_subcommand("train", "Train the selected cells on the major loop");
  auto* evaluate = app.add_subcommand("evaluate", "Closed-loop rollouts and metrics on the test curves");
  auto* reproduce = app.add_subcommand("reproduce", "Generate, train and evaluate experiments 1-4");
  auto* plot = app.add_subcommand("plot", "Render a trajectory file as SVG");

  std::string traj_path, training_path, svg_path, title;
  plot->add_option("trajectory", traj_path, "Trajectory CSV (H,B,B_pred)")->required();
  plot->add_option("--training", training_path, "Training trace CSV (H,B) drawn underneath");
  plot->add_option("-o,--output", svg_path, "SVG file (default: trajectory path with .svg)");
  plot->add_option("--title", title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    cfg.out = out_dir;
    const auto state = parse_state_mode(state_name);
    if (!state) throw ConfigError("--state must be cold or warm (got '" + state_name + "')");
    cfg.state = *state;
    if (clip_opt->count() > 0) cfg.train.clip_norm = clip;
    cfg.cells.clear();
    for (const auto& name : cell_names) {
      if (name == "all") {
        for (auto k : all_cell_kinds()) {
          if (std::find(cfg.cells.begin(), cfg.cells.end(), k) == cfg.cells.end()) cfg.cells.push_back(k);
        }
        continue;
      }
      const auto k = parse_cell_kind(name);
      if (!k) throw ConfigError("unknown cell '" + name + "'");
      if (std::find(cfg.cells.begin(), cfg.cells.end(), *k) == cfg.cells.end()) cfg.cells.push_back(*k);
    }

    if (generate->parsed()) {
      cmd_generate(cfg, run_layout(cfg), out);
    } else if (train_cmd->parsed()) {
      cmd_train(cfg, run_layout(cfg), out);
    } else if (evaluate->parsed()) {
      cmd_evaluate(cfg, run_layout(cfg), out);
    } else if (reproduce->parsed()) {
      std::vector<int> ids{1, 2, 3, 4};
      if (app.get_option("--experiment")->count() > 0) ids = {cfg.experiment};
      const auto dir = cmd_reproduce(cfg, ids, out);
      out << "summary written to " << (dir / "summary.txt").string() << '\n';
    } else if (plot->parsed()) {
      fs::path svg = svg_path.empty() ? fs::path(traj_path).replace_extension(".svg") : fs::path(svg_path);
      std::optional<fs::path> training;
      if (!training_path.empty()) training = training_path;
      cmd_plot(traj_path, training, svg, title.empty() ? fs::path(traj_path).stem().string() : title);
      out << "wrote " << svg.string() << '\n';
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hyst::cli
