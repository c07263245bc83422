#pragma once

#include <algorithm>
#include <cstdint>

#include "hlc/dist/sampling.hpp"
#include "hlc/model/theta.hpp"
#include "hlc/pe/training_set.hpp"

// Synthetic training data. Every generator is deterministic given its seed.

namespace hlc {

struct OracleDataConfig {
  std::size_t steps = 2000;
  std::size_t segment_length = 200;
  double noise_sd = 3.0;     // dB, observation noise on the perceived level
  double level_low = 20.0;   // dB
  double level_high = 85.0;  // dB
  std::size_t hold = 20;     // frames each drawn level is held
  std::uint64_t seed = 1;
};

namespace detail {

template <class Frame>
TrainingSet split_segments(std::size_t steps, std::size_t seg_len, Frame&& frame) {
  TrainingSet ts;
  seg_len = std::max<std::size_t>(seg_len, 2);
  Segment cur;
  for (std::size_t k = 0; k < steps; ++k) {
    auto [s, g] = frame(k);
    cur.s.push_back(s);
    cur.g.push_back(g);
    if (cur.s.size() == seg_len) {
      cur.meta.trial_id = static_cast<long long>(ts.segments.size());
      ts.add(std::move(cur));
      cur = {};
    }
  }
  if (cur.s.size() >= 2) {
    cur.meta.trial_id = static_cast<long long>(ts.segments.size());
    ts.add(std::move(cur));
  }
  return ts;
}

}  // namespace detail

/// Preferred gains from a target listener: levels are piecewise constant,
/// the gain is oracle_gain at the noisy level, so that
/// s = L*(s + g) + e with e ~ N(0, noise_sd^2).
inline TrainingSet generate_oracle_data(const HearingLossParams& target, const OracleDataConfig& cfg = {}) {
  Rng rng(cfg.seed);
  double level = 0.0;
  return detail::split_segments(cfg.steps, cfg.segment_length, [&](std::size_t k) {
    if (k % std::max<std::size_t>(cfg.hold, 1) == 0)
      level = cfg.level_low + (cfg.level_high - cfg.level_low) * rng.uniform();
    const double e = cfg.noise_sd * rng.standard_normal();
    return std::pair{level, oracle_gain(level - e, target) - e};
  });
}

struct GainWalkConfig {
  std::size_t steps = 2000;
  std::size_t segment_length = 200;
  double noise_sd = 3.0;
  double gain_low = 2.0;
  double gain_high = 40.0;
  std::uint64_t seed = 1;
};

/// Gains follow a random walk with the model's transition precision,
/// reflected into [gain_low, gain_high]; the level is the one whose
/// recruitment-region response to that gain reproduces it up to noise.
inline TrainingSet generate_constrained_data(const Theta& theta, const GainWalkConfig& cfg = {}) {
  theta.validate();
  if (!(theta.gain_precision > 0.0)) throw ArgumentError("constrained data needs gain precision > 0");
  Rng rng(cfg.seed);
  const double sd = 1.0 / std::sqrt(theta.gain_precision);
  const double a = theta.hearing.alpha, b = theta.hearing.beta;
  double g = 0.5 * (cfg.gain_low + cfg.gain_high);
  return detail::split_segments(cfg.steps, cfg.segment_length, [&](std::size_t k) {
    if (k > 0) {
      g += sd * rng.standard_normal();
      const double span = cfg.gain_high - cfg.gain_low;
      while (g < cfg.gain_low || g > cfg.gain_high) {
        if (g < cfg.gain_low) g = 2 * cfg.gain_low - g;
        if (g > cfg.gain_high) g = 2 * cfg.gain_high - g;
        if (span <= 0) g = cfg.gain_low;
      }
    }
    const double e = cfg.noise_sd * rng.standard_normal();
    return std::pair{(a * g + b + e) / (1.0 - a), g};
  });
}

/// Same listener, but every frame draws a fresh level so consecutive gains
/// are unrelated.
inline TrainingSet generate_unconstrained_data(const HearingLossParams& target, OracleDataConfig cfg = {}) {
  cfg.hold = 1;
  return generate_oracle_data(target, cfg);
}

}  // namespace hlc
