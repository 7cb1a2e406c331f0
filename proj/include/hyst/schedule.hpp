#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hyst/preisach.hpp"
#include "hyst/trace.hpp"

namespace hyst {

// Linear H ramp. The first segment of a schedule emits `samples` points from
// start to end inclusive; later segments omit their start (it equals the
// previous end) and emit `samples` points ending at `end`.
struct RampSegment {
  double start = 0.0;
  double end = 0.0;
  int samples = 1;
};

struct ExcitationSchedule {
  // Fields applied, unrecorded, before the first sample. Only extrema matter
  // to a rate-independent model, so a handful of values fixes the history.
  std::vector<double> preamble;
  std::vector<RampSegment> segments;

  void validate() const;
  std::size_t size() const;
  std::vector<double> samples() const;
};

// Targets for one experiment. B values in tesla.
struct ExperimentSpec {
  int id = 0;  // 1..4, or 0 for a custom spec
  double b_max = 1.7;
  std::array<double, 2> forc_origins{1.25, 0.5};
  std::array<double, 2> minor_maxima{1.25, 1.1};
  int train_len = 595;
  std::array<int, 2> forc_lens{199, 399};
  std::array<int, 2> minor_lens{399, 399};

  void validate() const;
};

// The four reference experiments; throws ConfigError outside 1..4.
ExperimentSpec experiment_spec(int id);

// Field at which a monotone sweep from `from` to `to` first drives the output
// across `target` (>= when ascending, <= when descending), linearly
// interpolated between the bracketing threshold levels. `plane` must already
// be in its state at `from`. Returns nullopt if the sweep never crosses.
std::optional<double> find_crossing(PreisachPlane plane, double from, double to, double target);

// Cycle -H_p -> +H_p -> -H_p where H_p is the first field at which the
// ascending branch from negative saturation reaches spec.b_max.
ExcitationSchedule build_major_schedule(const ExperimentSpec& spec, const PreisachPlane& plane);

// From the major-loop apex, descend until B crosses origin_b, then rise back
// to the apex field.
ExcitationSchedule build_forc_schedule(const ExperimentSpec& spec, const PreisachPlane& plane, double origin_b,
                                       int length);

// One closed cycle -H_p -> +H_p -> -H_p where H_p is the first field at which
// the ascending branch from negative saturation reaches peak_b. With
// peak_b = b_max this is the major cycle.
ExcitationSchedule build_minor_schedule(const ExperimentSpec& spec, const PreisachPlane& plane, double peak_b,
                                        int length);

// Drives the plane through the preamble and every sample; records (h, b).
HysteresisTrace run_schedule(PreisachPlane& plane, const ExcitationSchedule& schedule);

enum class Curve { major, forc1, forc2, minor1, minor2 };

std::string_view to_string(Curve c);
std::span<const Curve> all_curves();
std::span<const Curve> test_curves();

struct ExperimentData {
  ExperimentSpec spec;
  HysteresisTrace major;
  HysteresisTrace forc1;
  HysteresisTrace forc2;
  HysteresisTrace minor1;
  HysteresisTrace minor2;

  const HysteresisTrace& operator[](Curve c) const;
  HysteresisTrace& operator[](Curve c);
};

ExperimentData generate_experiment(const ExperimentSpec& spec, const PreisachPlane& plane);

}  // namespace hyst
