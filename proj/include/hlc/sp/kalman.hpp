#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hlc/model/theta.hpp"

namespace hlc {

/// Running posterior N(mean, variance) over the compensation gain (dB).
struct GainState {
  double mean = 0.0;
  double variance = 1e4;

  GaussianMessage message() const { return {mean, variance}; }
};

/// One step of the closed-form gain recursion:
///
///   a    = active slope at s
///   vu   = 1/gamma + v_prior
///   K    = a vu / (vartheta + a^2 vu)
///   mean = mean + K (s - L(s + mean))
///   var  = (1 - K a) vu
inline GainState kalman_step(const GainState& prior, double s, const Theta& theta) {
  theta.validate();
  if (theta.gain_precision == 0.0)
    throw NumericalError("kalman_step: gain precision is zero, use the unconstrained model");
  const double a = active_slope(s, theta.hearing);
  const double vu = 1.0 / theta.gain_precision + prior.variance;
  const double k = a * vu / (theta.obs_variance + a * a * vu);
  GainState out;
  out.mean = prior.mean + k * (s - zurek_L(s + prior.mean, theta.hearing));
  out.variance = (1.0 - k * a) * vu;
  return out;
}

/// Folds kalman_step over a level sequence starting from the g0 prior.
inline std::vector<GainState> run_sequence(std::span<const double> levels, const Theta& theta,
                                           GainState g0 = {0.0, 1e4}) {
  std::vector<GainState> out;
  out.reserve(levels.size());
  GainState state = g0;
  for (double s : levels) {
    state = kalman_step(state, s, theta);
    out.push_back(state);
  }
  return out;
}

}  // namespace hlc
