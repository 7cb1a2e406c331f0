#include "hyst/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hyst/errors.hpp"

namespace hyst {

void ExcitationSchedule::validate() const {
  if (segments.empty()) throw std::invalid_argument("schedule: no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].samples < 1) throw std::invalid_argument("schedule: segment with no samples");
    if (i > 0 && segments[i].start != segments[i - 1].end) {
      throw std::invalid_argument("schedule: segments must share endpoints");
    }
  }
}

std::size_t ExcitationSchedule::size() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += static_cast<std::size_t>(s.samples);
  return n;
}

std::vector<double> ExcitationSchedule::samples() const {
  validate();
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const double span = s.end - s.start;
    if (i == 0) {
      for (int k = 0; k < s.samples; ++k) {
        out.push_back(s.samples == 1 ? s.start : s.start + span * k / (s.samples - 1));
      }
    } else {
      for (int k = 1; k <= s.samples; ++k) out.push_back(s.start + span * k / s.samples);
    }
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (!(b_max > 0.0)) throw ConfigError("experiment: b_max must be positive");
  for (double v : forc_origins) {
    if (!(v < b_max)) throw ConfigError("experiment: FORC origins must lie below b_max");
  }
  for (double v : minor_maxima) {
    if (!(v > 0.0) || !(v < b_max)) throw ConfigError("experiment: minor-loop maxima must lie in (0, b_max)");
  }
  if (train_len < 2) throw ConfigError("experiment: training length must be >= 2");
  for (int n : forc_lens) {
    if (n < 2) throw ConfigError("experiment: FORC lengths must be >= 2");
  }
  for (int n : minor_lens) {
    if (n < 2) throw ConfigError("experiment: minor-loop lengths must be >= 2");
  }
}

ExperimentSpec experiment_spec(int id) {
  ExperimentSpec s;
  s.id = id;
  switch (id) {
    case 1:
      s.b_max = 1.7;
      s.forc_origins = {1.25, 0.5};
      s.minor_maxima = {1.25, 1.1};
      break;
    case 2:
      s.b_max = 1.25;
      s.forc_origins = {1.2, 1.0};
      s.minor_maxima = {1.0, 0.8};
      break;
    case 3:
      s.b_max = 1.3;
      s.forc_origins = {1.0, 0.75};
      s.minor_maxima = {1.0, 0.75};
      break;
    case 4:
      s.b_max = 1.5;
      s.forc_origins = {1.25, 0.75};
      s.minor_maxima = {0.9, 0.7};
      break;
    default:
      throw ConfigError("experiment id must be 1, 2, 3 or 4 (got " + std::to_string(id) + ")");
  }
  return s;
}

std::optional<double> find_crossing(PreisachPlane plane, double from, double to, double target) {
  const bool ascending = to >= from;
  const auto reached = [&](double b) { return ascending ? b >= target : b <= target; };

  double prev_h = from;
  double prev_b = plane.output();
  if (reached(prev_b)) return from;

  std::vector<double> path;
  for (double level : plane.levels()) {
    if (ascending ? (level > from && level < to) : (level < from && level > to)) path.push_back(level);
  }
  if (!ascending) std::reverse(path.begin(), path.end());
  path.push_back(to);

  for (double h : path) {
    const double b = plane.step(h);
    if (reached(b)) {
      if (b == prev_b) return h;
      return prev_h + (target - prev_b) / (b - prev_b) * (h - prev_h);
    }
    prev_h = h;
    prev_b = b;
  }
  return std::nullopt;
}

namespace {

// Splits length - 1 intervals over the segments in proportion to their H
// arc length (largest remainder); the first segment also carries the start
// sample. Zero-length segments after the first are dropped.
ExcitationSchedule allocate(std::vector<double> preamble, const std::vector<std::pair<double, double>>& ramps,
                            int length) {
  if (length < 1) throw ConfigError("schedule length must be positive");
  ExcitationSchedule s;
  s.preamble = std::move(preamble);

  std::vector<double> arcs;
  for (const auto& [a, b] : ramps) arcs.push_back(std::abs(b - a));
  const double total = std::accumulate(arcs.begin(), arcs.end(), 0.0);
  const int intervals = length - 1;

  if (total == 0.0) {
    s.segments.push_back({ramps.front().first, ramps.front().first, length});
    return s;
  }

  std::vector<int> counts(arcs.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int used = 0;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const double exact = intervals * arcs[i] / total;
    counts[i] = static_cast<int>(std::floor(exact));
    used += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; used < intervals; ++k, ++used) counts[remainders[k].second] += 1;

  for (std::size_t i = 0; i < ramps.size(); ++i) {
    if (i == 0) {
      s.segments.push_back({ramps[i].first, ramps[i].second, counts[i] + 1});
    } else if (counts[i] > 0) {
      s.segments.push_back({s.segments.back().end, ramps[i].second, counts[i]});
    }
  }
  return s;
}

PreisachPlane negatively_saturated(const PreisachPlane& plane) {
  PreisachPlane p = plane;
  p.step(p.negative_saturation_field());
  return p;
}

// Field at which the ascending branch from negative saturation reaches `target`.
double ascending_field(const PreisachPlane& plane, double target, const char* what) {
  const auto p = negatively_saturated(plane);
  if (target == plane.saturation()) return p.max_alpha();
  const auto h = find_crossing(p, p.negative_saturation_field(), p.max_alpha(), target);
  if (!h) {
    throw ConfigError(std::string(what) + ": B = " + std::to_string(target) +
                      " T is not reachable (plane saturation " + std::to_string(plane.saturation()) + " T)");
  }
  return *h;
}

}  // namespace

ExcitationSchedule build_major_schedule(const ExperimentSpec& spec, const PreisachPlane& plane) {
  spec.validate();
  const double apex = ascending_field(plane, spec.b_max, "major loop");
  return allocate({plane.negative_saturation_field(), apex, -apex}, {{-apex, apex}, {apex, -apex}},
                  spec.train_len);
}

ExcitationSchedule build_forc_schedule(const ExperimentSpec& spec, const PreisachPlane& plane, double origin_b,
                                       int length) {
  spec.validate();
  if (!(origin_b <= spec.b_max)) throw ConfigError("FORC origin must not exceed b_max");
  const double apex = ascending_field(plane, spec.b_max, "FORC");
  auto p = negatively_saturated(plane);
  p.step(apex);
  const auto reversal = find_crossing(p, apex, p.negative_saturation_field(), origin_b);
  if (!reversal) {
    throw ConfigError("FORC: descending branch never reaches B = " + std::to_string(origin_b) + " T");
  }
  return allocate({plane.negative_saturation_field(), apex}, {{apex, *reversal}, {*reversal, apex}}, length);
}

ExcitationSchedule build_minor_schedule(const ExperimentSpec& spec, const PreisachPlane& plane, double peak_b,
                                        int length) {
  spec.validate();
  if (!(peak_b > 0.0) || !(peak_b <= spec.b_max)) throw ConfigError("minor-loop peak must lie in (0, b_max]");
  const double top = ascending_field(plane, peak_b, "minor loop");
  return allocate({plane.negative_saturation_field(), top, -top}, {{-top, top}, {top, -top}}, length);
}

HysteresisTrace run_schedule(PreisachPlane& plane, const ExcitationSchedule& schedule) {
  const auto fields = schedule.samples();
  for (double h : schedule.preamble) plane.step(h);
  HysteresisTrace t;
  t.h.reserve(fields.size());
  t.b.reserve(fields.size());
  for (double h : fields) {
    t.h.push_back(h);
    t.b.push_back(plane.step(h));
  }
  return t;
}

namespace {
constexpr std::array<Curve, 5> kAllCurves = {Curve::major, Curve::forc1, Curve::forc2, Curve::minor1,
                                             Curve::minor2};
constexpr std::array<Curve, 4> kTestCurves = {Curve::forc1, Curve::forc2, Curve::minor1, Curve::minor2};
}  // namespace

std::string_view to_string(Curve c) {
  switch (c) {
    case Curve::major:
      return "major";
    case Curve::forc1:
      return "forc1";
    case Curve::forc2:
      return "forc2";
    case Curve::minor1:
      return "minor1";
    case Curve::minor2:
      return "minor2";
  }
  return "unknown";
}

std::span<const Curve> all_curves() { return kAllCurves; }
std::span<const Curve> test_curves() { return kTestCurves; }

const HysteresisTrace& ExperimentData::operator[](Curve c) const {
  switch (c) {
    case Curve::major:
      return major;
    case Curve::forc1:
      return forc1;
    case Curve::forc2:
      return forc2;
    case Curve::minor1:
      return minor1;
    case Curve::minor2:
      return minor2;
  }
  throw std::invalid_argument("unknown curve");
}

HysteresisTrace& ExperimentData::operator[](Curve c) {
  return const_cast<HysteresisTrace&>(std::as_const(*this)[c]);
}

ExperimentData generate_experiment(const ExperimentSpec& spec, const PreisachPlane& plane) {
  spec.validate();
  ExperimentData d;
  d.spec = spec;
  const auto run = [&](const ExcitationSchedule& s) {
    PreisachPlane p = plane;
    return run_schedule(p, s);
  };
  d.major = run(build_major_schedule(spec, plane));
  d.forc1 = run(build_forc_schedule(spec, plane, spec.forc_origins[0], spec.forc_lens[0]));
  d.forc2 = run(build_forc_schedule(spec, plane, spec.forc_origins[1], spec.forc_lens[1]));
  d.minor1 = run(build_minor_schedule(spec, plane, spec.minor_maxima[0], spec.minor_lens[0]));
  d.minor2 = run(build_minor_schedule(spec, plane, spec.minor_maxima[1], spec.minor_lens[1]));
  return d;
}

}  // namespace hyst
