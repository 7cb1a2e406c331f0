#include "hyst/preisach.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hyst {

void validate(const Relay& r) {
  if (!(r.alpha >= r.beta)) throw std::invalid_argument("relay: alpha must be >= beta");
  if (r.state != 1 && r.state != -1) throw std::invalid_argument("relay: state must be +1 or -1");
}

Relay relay_update(Relay r, double u) {
  if (u >= r.alpha) {
    r.state = 1;
  } else if (u <= r.beta) {
    r.state = -1;
  }
  return r;
}

double WeightFunction::operator()(double alpha, double beta) const {
  const double interaction = 0.5 * (alpha + beta);
  const double coercive = 0.5 * (alpha - beta);
  const double di = (interaction - interaction_center) / interaction_width;
  const double dc = (coercive - coercive_center) / coercive_width;
  return std::exp(-0.5 * (di * di + dc * dc));
}

PreisachPlane PreisachPlane::make(const PreisachConfig& cfg) {
  if (cfg.resolution < 2) throw std::invalid_argument("preisach: resolution must be >= 2");
  if (!(cfg.field_limit > 0.0)) throw std::invalid_argument("preisach: field limit must be positive");
  if (!(cfg.saturation > 0.0)) throw std::invalid_argument("preisach: saturation must be positive");
  if (!(cfg.weight.interaction_width > 0.0) || !(cfg.weight.coercive_width > 0.0)) {
    throw std::invalid_argument("preisach: weight widths must be positive");
  }
  const int n = cfg.resolution;
  const double spacing = 2.0 * cfg.field_limit / (n - 1);
  // Cell area is uniform, so it cancels in the normalization.
  std::vector<Relay> relays;
  std::vector<double> weights;
  relays.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  weights.reserve(relays.capacity());
  for (int i = 0; i < n; ++i) {
    const double alpha = -cfg.field_limit + i * spacing;
    for (int j = 0; j <= i; ++j) {
      const double beta = -cfg.field_limit + j * spacing;
      relays.push_back({alpha, beta, -1});
      weights.push_back(cfg.weight(alpha, beta));
    }
  }
  return from_relays(std::move(relays), std::move(weights), cfg.saturation);
}

PreisachPlane PreisachPlane::from_relays(std::vector<Relay> relays, std::vector<double> weights,
                                         double saturation) {
  if (relays.empty() || relays.size() != weights.size()) {
    throw std::invalid_argument("preisach: need one weight per relay");
  }
  if (!(saturation > 0.0)) throw std::invalid_argument("preisach: saturation must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < relays.size(); ++i) {
    validate(relays[i]);
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("preisach: weights must be finite and nonnegative");
    }
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("preisach: weights sum to zero");
  for (auto& w : weights) w /= total;

  PreisachPlane p;
  p.relays_ = std::move(relays);
  p.weights_ = std::move(weights);
  p.saturation_ = saturation;
  p.scale_ = saturation;
  p.finish_construction();
  return p;
}

void PreisachPlane::finish_construction() {
  max_alpha_ = relays_.front().alpha;
  min_beta_ = relays_.front().beta;
  for (const auto& r : relays_) {
    max_alpha_ = std::max(max_alpha_, r.alpha);
    min_beta_ = std::min(min_beta_, r.beta);
    levels_.push_back(r.alpha);
    levels_.push_back(r.beta);
  }
  std::sort(levels_.begin(), levels_.end());
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
}

double PreisachPlane::step(double h) {
  for (auto& r : relays_) {
    if (h >= r.alpha) {
      r.state = 1;
    } else if (h <= r.beta) {
      r.state = -1;
    }
  }
  return output();
}

double PreisachPlane::output() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < relays_.size(); ++i) sum += weights_[i] * relays_[i].state;
  return scale_ * sum;
}

void PreisachPlane::saturate_negative() {
  for (auto& r : relays_) r.state = -1;
}

double PreisachPlane::negative_saturation_field() const {
  const double span = std::max(1.0, max_alpha_ - min_beta_);
  return min_beta_ - 1e-3 * span;
}

double PreisachPlane::positive_saturation_field() const {
  const double span = std::max(1.0, max_alpha_ - min_beta_);
  return max_alpha_ + 1e-3 * span;
}

double PreisachPlane::quantum() const {
  std::map<double, double> up;
  std::map<double, double> down;
  for (std::size_t i = 0; i < relays_.size(); ++i) {
    up[relays_[i].alpha] += weights_[i];
    down[relays_[i].beta] += weights_[i];
  }
  double q = 0.0;
  for (const auto& [level, w] : up) q = std::max(q, w);
  for (const auto& [level, w] : down) q = std::max(q, w);
  return 2.0 * scale_ * q;
}

std::pair<PreisachPlane, double> preisach_step(PreisachPlane plane, double h) {
  const double b = plane.step(h);
  return {std::move(plane), b};
}

}  // namespace hyst
