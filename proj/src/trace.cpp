#include "hyst/trace.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hyst/errors.hpp"

namespace hyst {

void HysteresisTrace::validate() const {
  if (h.size() != b.size()) throw std::invalid_argument("trace: H and B lengths differ");
  if (h.empty()) throw std::invalid_argument("trace: empty");
}

std::string format_exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("cannot parse '" + text + "' as a number in " + what);
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto lo = cell.find_first_not_of(" \t\r");
    const auto hi = cell.find_last_not_of(" \t\r");
    out.push_back(lo == std::string::npos ? std::string() : cell.substr(lo, hi - lo + 1));
  }
  return out;
}

std::ofstream create_new_file(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) {
    throw ConfigError("refusing to overwrite existing file " + path.string());
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot create " + path.string());
  return out;
}

namespace {

std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != header) {
    throw ConfigError(path.string() + ": unexpected header");
  }
  std::vector<std::vector<double>> cols(header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError(path.string() + ": wrong column count on line " + std::to_string(row));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      cols[c].push_back(parse_double(cells[c], path.string() + " line " + std::to_string(row)));
    }
  }
  return cols;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const HysteresisTrace& trace) {
  trace.validate();
  auto out = create_new_file(path);
  out << "H,B\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << format_exact(trace.h[i]) << ',' << format_exact(trace.b[i]) << '\n';
  }
}

HysteresisTrace read_trace_csv(const std::filesystem::path& path) {
  auto cols = read_columns(path, {"H", "B"});
  HysteresisTrace t{std::move(cols[0]), std::move(cols[1]), 1.0};
  if (t.h.empty()) throw ConfigError(path.string() + ": no samples");
  return t;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  traj.truth.validate();
  if (traj.b_pred.size() != traj.truth.size()) {
    throw std::invalid_argument("trajectory: prediction length differs from truth");
  }
  auto out = create_new_file(path);
  out << "H,B,B_pred\n";
  for (std::size_t i = 0; i < traj.truth.size(); ++i) {
    out << format_exact(traj.truth.h[i]) << ',' << format_exact(traj.truth.b[i]) << ','
        << format_exact(traj.b_pred[i]) << '\n';
  }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  auto cols = read_columns(path, {"H", "B", "B_pred"});
  Trajectory t{{std::move(cols[0]), std::move(cols[1]), 1.0}, std::move(cols[2])};
  if (t.truth.h.empty()) throw ConfigError(path.string() + ": no samples");
  return t;
}

}  // namespace hyst
