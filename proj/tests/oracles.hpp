#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "hyst/cells.hpp"
#include "hyst/evaluation.hpp"
#include "hyst/ode_models.hpp"
#include "hyst/preisach.hpp"

namespace hyst::test {

// Alternating dominant extrema that survive the wiping-out rule, starting
// from an implicit -infinity.
inline std::vector<double> reduce_history(const std::vector<double>& seq) {
  std::vector<double> s{-std::numeric_limits<double>::infinity()};
  for (double u : seq) {
    s.push_back(u);
    while (s.size() >= 3) {
      const double a = s[s.size() - 3], b = s[s.size() - 2], c = s.back();
      if ((b - a) * (c - b) >= 0) {
        s.erase(s.end() - 2);  // b is not a turning point
      } else if (std::abs(c - b) >= std::abs(a - b)) {
        s.erase(s.end() - 3, s.end() - 1);  // c wipes out a and b
      } else {
        break;
      }
    }
  }
  return {s.begin() + 1, s.end()};
}

inline std::vector<std::int8_t> relay_states(const PreisachPlane& p) {
  std::vector<std::int8_t> s;
  for (const auto& r : p.relays()) s.push_back(r.state);
  return s;
}

struct MemoryCheck {
  long sequences = 0;
  long mismatches = 0;
};

// Every 3-relay plane with thresholds on {-2, ..., 2}, every input sequence of
// length <= 6 on the same grid: the relay states must equal those reached by
// replaying only the reduced history.
inline MemoryCheck exhaustive_return_point_memory() {
  const std::array<double, 5> grid{-2, -1, 0, 1, 2};
  std::vector<Relay> pool;
  for (double a : grid) {
    for (double b : grid) {
      if (a >= b) pool.push_back({a, b, -1});
    }
  }
  MemoryCheck result;
  std::vector<double> seq;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      for (std::size_t k = j + 1; k < pool.size(); ++k) {
        const auto fresh = PreisachPlane::from_relays({pool[i], pool[j], pool[k]}, {1.0, 2.0, 4.0}, 7.0);
        const auto visit = [&](auto&& self, const PreisachPlane& plane) -> void {
          if (!seq.empty()) {
            auto replay = fresh;
            for (double u : reduce_history(seq)) replay.step(u);
            ++result.sequences;
            if (relay_states(replay) != relay_states(plane) || replay.output() != plane.output()) {
              ++result.mismatches;
            }
          }
          if (seq.size() == 6) return;
          for (double u : grid) {
            auto next = plane;
            next.step(u);
            seq.push_back(u);
            self(self, next);
            seq.pop_back();
          }
        };
        visit(visit, fresh);
      }
    }
  }
  return result;
}

using Vec = std::vector<double>;

// Plain-loop cell implementation, sharing nothing with the tape.
inline Vec matvec(const ad::Tensor<double>& w, const Vec& x) {
  Vec out(static_cast<std::size_t>(w.rows()), 0.0);
  for (Index r = 0; r < w.rows(); ++r) {
    for (Index c = 0; c < w.cols(); ++c) out[r] += w(r, c) * x[c];
  }
  return out;
}

inline Vec bias(const ad::Tensor<double>& b) { return Vec(b.flat().data(), b.flat().data() + b.size()); }

inline Vec sum3(const Vec& a, const Vec& b, const Vec& c) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i] + c[i];
  return out;
}

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec sq(const Vec& a) {
  Vec out(a);
  for (auto& x : out) x = x * x;
  return out;
}

struct RefState {
  Vec h, c;
};

inline RefState reference_step(const CellParams<double>& p, const RefState& s, const Vec& u) {
  const auto m = static_cast<std::size_t>(p.hidden);
  RefState n{Vec(m), Vec(m)};
  const auto& t = p.tensors;
  switch (p.kind) {
    case CellKind::hystrnn: {
      namespace k = slot::hystrnn;
      const auto a = sum3(matvec(t[k::W1], s.h), matvec(t[k::Wc1], s.c), sum3(matvec(t[k::V1], u), bias(t[k::b1]), Vec(m)));
      const auto b = sum3(matvec(t[k::W2], sq(s.h)), matvec(t[k::Wc2], sq(s.c)),
                          sum3(matvec(t[k::V2], sq(u)), bias(t[k::b2]), Vec(m)));
      for (std::size_t i = 0; i < m; ++i) {
        n.c[i] = s.c[i] + p.dt * std::tanh(a[i]) + p.dt * std::tanh(b[i]);
        n.h[i] = s.h[i] + p.dt * n.c[i];
      }
      break;
    }
    case CellKind::rnn: {
      namespace k = slot::rnn;
      const auto a = sum3(matvec(t[k::W], u), matvec(t[k::U], s.h), bias(t[k::b]));
      for (std::size_t i = 0; i < m; ++i) n.h[i] = std::tanh(a[i]);
      break;
    }
    case CellKind::lstm: {
      namespace k = slot::lstm;
      const auto gi = sum3(matvec(t[k::Wi], u), matvec(t[k::Ui], s.h), bias(t[k::bi]));
      const auto gf = sum3(matvec(t[k::Wf], u), matvec(t[k::Uf], s.h), bias(t[k::bf]));
      const auto gg = sum3(matvec(t[k::Wg], u), matvec(t[k::Ug], s.h), bias(t[k::bg]));
      const auto go = sum3(matvec(t[k::Wo], u), matvec(t[k::Uo], s.h), bias(t[k::bo]));
      for (std::size_t i = 0; i < m; ++i) {
        n.c[i] = sig(gf[i]) * s.c[i] + sig(gi[i]) * std::tanh(gg[i]);
        n.h[i] = sig(go[i]) * std::tanh(n.c[i]);
      }
      break;
    }
    case CellKind::gru: {
      namespace k = slot::gru;
      const auto r = sum3(matvec(t[k::Wr], u), matvec(t[k::Ur], s.h), bias(t[k::br]));
      const auto z = sum3(matvec(t[k::Wz], u), matvec(t[k::Uz], s.h), bias(t[k::bz]));
      const auto un = matvec(t[k::Un], s.h);
      const auto wn = matvec(t[k::Wn], u);
      for (std::size_t i = 0; i < m; ++i) {
        const double cand = std::tanh(wn[i] + t[k::bn](i) + sig(r[i]) * (un[i] + t[k::bhn](i)));
        n.h[i] = (1.0 - sig(z[i])) * cand + sig(z[i]) * s.h[i];
      }
      break;
    }
  }
  return n;
}

// Fills every tensor (biases included) uniformly in [-1, 1].
inline CellParams<double> random_params(CellKind kind, Index m, std::mt19937_64& g, double dt = 0.3) {
  auto p = zero_params<double>(kind, m, dt);
  std::uniform_real_distribution<double> d(-1, 1);
  for (auto& t : p.tensors) {
    for (Index i = 0; i < t.size(); ++i) t.flat()(i) = d(g);
  }
  return p;
}

inline Vec values(ad::Var<double> v) {
  const auto t = v.value();
  return Vec(t.flat().data(), t.flat().data() + t.size());
}

struct Single {
  ad::Tape<double> tape;
  CellParams<double> params;
  BoundCell<double> cell;
  CellState<double> state;

  explicit Single(CellParams<double> p) : params(std::move(p)) {
    cell = bind(tape, params, false);
    state = zero_state(tape, cell);
  }
  void advance(const Vec& u) { state = step(cell, state, tape.constant(std::span<const double>(u))); }
};

// HystRNN with branch-1 weights zeroed, driven by u and -u for 20 steps.
// Returns how many of `instances` random configurations end in different
// states.
inline int sign_symmetry_violations(std::uint64_t seed, int instances) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  int bad = 0;
  for (int instance = 0; instance < instances; ++instance) {
    auto p = random_params(CellKind::hystrnn, 4, g, 0.1);
    namespace k = slot::hystrnn;
    for (auto i : {k::W1, k::Wc1, k::V1, k::b1}) p[i].flat().setZero();
    Single pos(p), neg(p);
    for (int t = 0; t < 20; ++t) {
      const Vec u{d(g), d(g)};
      pos.advance(u);
      neg.advance({-u[0], -u[1]});
    }
    if (values(pos.state.h) != values(neg.state.h) || values(pos.state.c) != values(neg.state.c)) ++bad;
  }
  return bad;
}

// HystRNN with branch-2 weights zeroed against a plain first-branch update
// over 10 steps. Returns the largest relative state difference.
inline double branch_off_error(std::uint64_t seed, int instances) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  double worst = 0;
  for (int instance = 0; instance < instances; ++instance) {
    auto p = random_params(CellKind::hystrnn, 3, g, 0.2);
    namespace k = slot::hystrnn;
    for (auto i : {k::W2, k::Wc2, k::V2, k::b2}) p[i].flat().setZero();
    Single s(p);
    Vec y(3, 0.0), z(3, 0.0);
    for (int t = 0; t < 10; ++t) {
      const Vec u{d(g), d(g)};
      s.advance(u);
      const auto a = sum3(matvec(p[k::W1], y), matvec(p[k::Wc1], z), sum3(matvec(p[k::V1], u), bias(p[k::b1]), Vec(3)));
      for (int i = 0; i < 3; ++i) {
        z[i] = z[i] + p.dt * std::tanh(a[i]);
        y[i] = y[i] + p.dt * z[i];
      }
    }
    const auto h = values(s.state.h), c = values(s.state.c);
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(h[i] - y[i]) / std::max(1.0, std::abs(y[i])));
      worst = std::max(worst, std::abs(c[i] - z[i]) / std::max(1.0, std::abs(z[i])));
    }
  }
  return worst;
}

// Direct loop evaluation of the four metric formulas.
struct DirectMetrics {
  double rel, ev, max, mae;
};

inline DirectMetrics direct_metrics(const std::vector<double>& p, const std::vector<double>& t) {
  const double n = static_cast<double>(t.size());
  double num = 0, den = 0, mean = 0, mx = 0, abs_sum = 0;
  for (double x : t) mean += x;
  mean /= n;
  double var = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = t[i] - p[i];
    num += e * e;
    den += t[i] * t[i];
    var += (t[i] - mean) * (t[i] - mean);
    mx = std::max(mx, std::abs(e));
    abs_sum += std::abs(e);
  }
  return {std::sqrt(num) / std::sqrt(den), 1 - num / var, mx, abs_sum / n};
}

struct ReplayCheck {
  int instances = 0;
  int seed_mismatches = 0;
  int step_mismatches = 0;
};

// Closed-loop rollout against a step-by-step replay of the feedback loop on
// 10-sample drives, `per_cell` random instances per cell kind.
inline ReplayCheck rollout_replay(std::uint64_t seed, int per_cell) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> field(-380, 380), flux(-1.4, 1.6);
  const NormStats norm{-400.0, 400.0, -1.5, 1.7};
  ReplayCheck r;
  for (auto kind : all_cell_kinds()) {
    for (int instance = 0; instance < per_cell; ++instance, ++r.instances) {
      const auto params = init_params(kind, 3, g());
      std::vector<double> h(10);
      for (auto& x : h) x = field(g);
      const double seed_b = flux(g);
      const auto pred = rollout(params, norm, h, seed_b);
      if (pred.size() != h.size() || pred[0] != seed_b) {
        ++r.seed_mismatches;
        continue;
      }
      ad::Tape<double> tape;
      const auto cell = bind(tape, params, false);
      auto state = zero_state(tape, cell);
      double prev = normalize(seed_b, norm.b_min, norm.b_max);
      for (std::size_t k = 1; k < h.size(); ++k) {
        state = step(cell, state, tape.constant({normalize(h[k], norm.h_min, norm.h_max), prev}));
        prev = readout(cell, state).scalar();
        if (pred[k] != denormalize(prev, norm.b_min, norm.b_max)) ++r.step_mismatches;
      }
    }
  }
  return r;
}

// Error ratio (N=200 vs 400) / (400 vs 800) of the final B under a smooth
// two-tone drive; first-order integrators give about 2.
inline double ode_halving_ratio(bool duhem) {
  const auto final_b = [&](int n) {
    std::vector<double> drive;
    for (int k = 0; k <= n; ++k) drive.push_back(std::sin(2 * M_PI * k / n) + 0.5 * std::sin(4 * M_PI * k / n));
    const auto b = duhem ? simulate_duhem<double>({1.0, 1.0, 0.1}, drive, 0.0)
                         : simulate_boucwen<double>({1.0, 0.5, 0.5, 1.0}, drive, 0.0);
    return b.back();
  };
  const double a = final_b(200), b = final_b(400), c = final_b(800);
  return (a - b) / (b - c);
}

}  // namespace hyst::test
