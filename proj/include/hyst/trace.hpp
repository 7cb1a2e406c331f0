#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace hyst {

// Paired H (A/m) and B (T) samples on a uniform index grid.
struct HysteresisTrace {
  std::vector<double> h;
  std::vector<double> b;
  double dt_index = 1.0;

  std::size_t size() const { return h.size(); }

  // Throws std::invalid_argument unless h and b have equal, nonzero length.
  void validate() const;
};

// A trace plus a predicted B column, as written by the evaluator.
struct Trajectory {
  HysteresisTrace truth;
  std::vector<double> b_pred;
};

// Two-column CSV with header "H,B", 17 significant digits per value.
void write_trace_csv(const std::filesystem::path& path, const HysteresisTrace& trace);
HysteresisTrace read_trace_csv(const std::filesystem::path& path);

// Three-column CSV with header "H,B,B_pred".
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// Formats a double so that reading it back yields the identical value.
std::string format_exact(double v);

// Opens `path` for writing, refusing to replace an existing file.
// Throws ConfigError if the file exists or cannot be created.
std::ofstream create_new_file(const std::filesystem::path& path);

// Splits one CSV line on commas, trimming surrounding whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

// Strict decimal parse; throws ConfigError naming `what` on failure.
double parse_double(const std::string& text, const std::string& what);

}  // namespace hyst
