#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>

#include "hlc/sp/kalman.hpp"

namespace hlc {

struct CompressionCharacterization {
  double compression_ratio = 1.0;
  int attack_steps = 0;   // low -> high level
  int release_steps = 0;  // high -> low level
  std::map<double, double> steady_gain_per_level;
  std::map<double, double> steady_variance_per_level;
};

class CharacterizationError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kSettleTolerance = 2.0;  // dB

/// Iterates the recursion at a constant level until the state stops moving.
inline GainState steady_state(double s, const Theta& theta, GainState start = {0.0, 1e4},
                              int max_steps = 100000) {
  GainState g = start;
  for (int i = 0; i < max_steps; ++i) {
    GainState next = kalman_step(g, s, theta);
    const bool done = std::abs(next.mean - g.mean) < 1e-13 && std::abs(next.variance - g.variance) < 1e-13;
    g = next;
    if (done) break;
  }
  return g;
}

/// Steps until the gain stays within 2 dB of the final value after the
/// input switches from `from` to `to` (starting in the `from` steady state).
inline int settling_steps(const GainState& start, double to, double final_gain, const Theta& theta,
                          int max_steps = 100000) {
  GainState g = start;
  int last_outside = std::abs(g.mean - final_gain) > kSettleTolerance ? 0 : -1;
  // the response is monotone inside one region, but scan a tail anyway
  for (int k = 1; k <= max_steps; ++k) {
    g = kalman_step(g, to, theta);
    if (std::abs(g.mean - final_gain) > kSettleTolerance) last_outside = k;
    if (std::abs(g.mean - final_gain) < 1e-9) break;
  }
  return last_outside + 1;
}

inline CompressionCharacterization characterize(const Theta& theta, double low, double high) {
  theta.validate();
  const Thresholds t = thresholds(theta.hearing);
  for (double s : {low, high})
    if (!(s >= t.hearing && s < t.recruitment))
      throw CharacterizationError("level " + detail::fmt(s) + " dB is outside the recruitment region [" +
                                  detail::fmt(t.hearing) + ", " + detail::fmt(t.recruitment) + ")");
  if (!(low < high)) throw CharacterizationError("low level must be below high level");

  const GainState lo = steady_state(low, theta);
  const GainState hi = steady_state(high, theta);
  CompressionCharacterization c;
  c.steady_gain_per_level[low] = lo.mean;
  c.steady_gain_per_level[high] = hi.mean;
  c.steady_variance_per_level[low] = lo.variance;
  c.steady_variance_per_level[high] = hi.variance;
  c.compression_ratio = (high - low) / ((high + hi.mean) - (low + lo.mean));
  c.attack_steps = settling_steps(lo, high, hi.mean, theta);
  c.release_steps = settling_steps(hi, low, lo.mean, theta);
  return c;
}

inline void print(std::ostream& os, const CompressionCharacterization& c, double hop_ms = 0.0) {
  os << "compression_ratio = " << c.compression_ratio << "\n";
  os << "attack_steps = " << c.attack_steps << "\n";
  os << "release_steps = " << c.release_steps << "\n";
  if (hop_ms > 0.0) {
    os << "attack_ms = " << c.attack_steps * hop_ms << "\n";
    os << "release_ms = " << c.release_steps * hop_ms << "\n";
  }
  for (const auto& [level, gain] : c.steady_gain_per_level)
    os << "steady_gain[" << level << "] = " << gain << "\n";
}

/// Gain trace as CSV: k,s_dB,g_mean_dB,g_sd_dB
inline void write_trace_csv(std::ostream& os, std::span<const double> levels,
                            std::span<const GainState> gains) {
  if (levels.size() != gains.size()) throw ArgumentError("trace: level and gain counts differ");
  os << "k,s_dB,g_mean_dB,g_sd_dB\n";
  for (std::size_t k = 0; k < levels.size(); ++k)
    os << k << ',' << levels[k] << ',' << gains[k].mean << ',' << std::sqrt(gains[k].variance) << '\n';
}

}  // namespace hlc
