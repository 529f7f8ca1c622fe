#pragma once

// Random near-fully-utilized task systems: n tasks with integer periods and
// integer costs whose utilizations sum to at most the processor count, close
// enough that padding (pad_to_full_utilization) closes the gap with one small
// filler task.
//
// Utilizations are drawn by walking the simplex {sum u = m, 0 < u <= 1}: each
// draw is uniform on the interval its precursors leave open. Costs are then
// rounded to the integer grid of each period, which perturbs the sum, so a
// greedy pass nudges costs by one unit at a time until the shortfall is
// non-negative and below any remaining unit step, then tries to zero it by
// re-solving a single task's cost. An exact hit is not always reachable (the
// shortfall's denominator is the lcm of all periods, which no single cost can
// absorb in general); a small positive shortfall is the contract and the
// usual outcome. Draws whose shortfall cannot be brought under 1/16 — the
// bound that guarantees the filler merges into an existing bin when packing —
// retry with a derived seed.

#include "runsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace runsched {

struct GeneratorConfig {
  int tasks = 0;
  int processors = 0;
  int period_min = 5;
  int period_max = 100;
  std::uint64_t seed = 0;
  int max_attempts = 64;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline TaskSystem generate_task_system(const GeneratorConfig& cfg) {
  if (cfg.tasks < 1 || cfg.processors < 1)
    throw std::invalid_argument("need at least one task and one processor");
  if (cfg.tasks < cfg.processors)
    throw std::invalid_argument("cannot reach full utilization with fewer tasks than processors");
  if (cfg.period_min < 1 || cfg.period_max < cfg.period_min)
    throw std::invalid_argument("bad period range");

  const int n = cfg.tasks;
  const int m = cfg.processors;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    std::mt19937_64 rng(detail::mix_seed(cfg.seed + 0x51ed2701ull * attempt));

    std::vector<double> u(n);
    double rem = m;
    for (int i = 0; i < n; ++i) {
      const double left = n - 1 - i;  // capacity of the tasks still to draw
      const double lo = std::max(0.0, rem - left);
      const double hi = std::min(1.0, rem);
      u[i] = i + 1 == n ? rem : std::uniform_real_distribution<double>(lo, hi)(rng);
      rem -= u[i];
    }
    std::shuffle(u.begin(), u.end(), rng);

    std::vector<long> period(n), cost(n);
    std::uniform_int_distribution<long> pd(cfg.period_min, cfg.period_max);
    for (int i = 0; i < n; ++i) {
      period[i] = pd(rng);
      cost[i] = std::lround(u[i] * static_cast<double>(period[i]));
      cost[i] = std::max(1l, std::min(period[i], cost[i]));
    }

    const auto shortfall = [&] {  // how far the rounded sum sits below m
      Rational s(0);
      for (int i = 0; i < n; ++i) s += Rational(cost[i], period[i]);
      return Rational(m) - s;
    };

    // greedy one-unit nudges: steps no larger than the gap, largest first,
    // plus one minimal-step decrement to recover from an overshoot
    Rational d = shortfall();
    for (int iter = 0; iter < 16 * n && d != Rational(0); ++iter) {
      int best = -1;
      for (int i = 0; i < n; ++i) {
        const Rational step(1, period[i]);
        const bool fits = d > Rational(0) ? (cost[i] < period[i] && step <= d)
                                          : (cost[i] > 1 && step <= -d);
        if (fits && (best < 0 || period[i] < period[best])) best = i;
      }
      if (best < 0) {
        if (d >= Rational(0)) break;
        for (int i = 0; i < n; ++i)  // overshot: give back the smallest unit
          if (cost[i] > 1 && (best < 0 || period[i] > period[best])) best = i;
        if (best < 0) break;
      }
      cost[best] += d > Rational(0) ? 1 : -1;
      d = shortfall();
    }

    // try to zero the remainder by re-solving one task's cost outright
    if (d > Rational(0)) {
      for (int i = 0; i < n && d != Rational(0); ++i) {
        const Rational want = Rational(cost[i]) + d * Rational(period[i]);
        if (want.den() == 1 && want >= Rational(1) && want <= Rational(period[i])) {
          cost[i] = want.num().convert_to<long>();
          d = Rational(0);
        }
      }
    }
    if (d < Rational(0) || d > Rational(1, 16)) continue;  // retry the whole draw

    TaskSystem sys;
    sys.processors = m;
    for (int i = 0; i < n; ++i) {
      Task t;
      t.id = i + 1;
      t.period = Rational(period[i]);
      t.utilization = Rational(cost[i], period[i]);
      sys.tasks.push_back(t);
    }
    validate(sys);
    return sys;
  }
  throw std::runtime_error("task-set generation failed after retries");
}

}  // namespace runsched
