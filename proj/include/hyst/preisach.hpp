#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hyst {

// Non-ideal relay: switches up at u >= alpha, down at u <= beta, keeps its
// state in between.
struct Relay {
  double alpha = 0.0;
  double beta = 0.0;
  std::int8_t state = -1;
};

// Throws std::invalid_argument if alpha < beta or state is not +-1.
void validate(const Relay& r);

Relay relay_update(Relay r, double u);

// Product of Gaussians in the interaction field (alpha+beta)/2 and the
// coercive field (alpha-beta)/2.
struct WeightFunction {
  double interaction_center = 0.0;
  double interaction_width = 250.0;
  double coercive_center = 120.0;
  double coercive_width = 150.0;

  double operator()(double alpha, double beta) const;
};

struct PreisachConfig {
  int resolution = 200;        // threshold levels per axis
  double field_limit = 600.0;  // thresholds span [-limit, limit] A/m
  double saturation = 1.9;     // B at full positive saturation, T
  WeightFunction weight;
};

// Discretized Preisach plane over the triangle alpha >= beta.
//
// Output is saturation_scale * sum(weight_i * state_i) with the weights
// normalized so that the all-up state yields exactly `saturation`.
class PreisachPlane {
 public:
  static PreisachPlane make(const PreisachConfig& cfg);

  // Arbitrary relay set; weights must be nonnegative with a positive sum.
  // Relays keep their states.
  static PreisachPlane from_relays(std::vector<Relay> relays, std::vector<double> weights, double saturation);

  // Applies h to every relay and returns the new output.
  double step(double h);
  double output() const;

  // Sets every relay to -1, the state after any field below min_beta().
  void saturate_negative();

  std::span<const Relay> relays() const { return relays_; }
  std::span<const double> weights() const { return weights_; }
  double saturation() const { return saturation_; }
  double saturation_scale() const { return scale_; }
  double max_alpha() const { return max_alpha_; }
  double min_beta() const { return min_beta_; }

  // A field strictly below every beta, driving the plane to negative saturation.
  double negative_saturation_field() const;
  double positive_saturation_field() const;

  // Sorted distinct switching thresholds; the output is piecewise constant between them.
  std::span<const double> levels() const { return levels_; }

  // Largest output jump across a single threshold level, an upper bound on
  // the step between neighbouring distinct outputs along a monotone sweep.
  double quantum() const;

 private:
  PreisachPlane() = default;
  void finish_construction();

  std::vector<Relay> relays_;
  std::vector<double> weights_;  // normalized, sum to 1
  std::vector<double> levels_;
  double saturation_ = 1.0;
  double scale_ = 1.0;
  double max_alpha_ = 0.0;
  double min_beta_ = 0.0;
};

// Value-semantics step: returns the updated plane and its output.
std::pair<PreisachPlane, double> preisach_step(PreisachPlane plane, double h);

}  // namespace hyst
