#pragma once

#include <cmath>

#include "hlc/dist/messages.hpp"
#include "hlc/model/zurek.hpp"

// Variational messages of the merged observation factor
//   f(s, x, alpha, beta, v) = N(s | L(x; alpha, beta), v)
// under a mean-field posterior. Shared by the factor-graph node rules and the
// parameter-estimation chain so both compute identical updates.

namespace hlc {

// Which piece of the loudness curve an observation is attributed to.
enum class ObservationRegion { flat, recruitment, identity };

/// Region for an observed level s at received level x, judged at the current
/// parameter means. The upper split follows the observed level (as the
/// closed-form gain recursion does); the flat piece is detected from x.
inline ObservationRegion observation_region(double s, double x_mean, double alpha_mean,
                                            double beta_mean) {
  if (alpha_mean > 1.0 && s >= -beta_mean / (alpha_mean - 1.0)) return ObservationRegion::identity;
  if (alpha_mean * x_mean + beta_mean < 0.0) return ObservationRegion::flat;
  return ObservationRegion::recruitment;
}

// First two moments of every quantity the observation factor touches.
struct ObservationMoments {
  double s = 0.0;
  double x_mean = 0.0;
  double x_variance = 0.0;
  double alpha_mean = 1.0;
  double alpha_variance = 0.0;
  double beta_mean = 0.0;
  double beta_variance = 0.0;
  double inv_variance_mean = 1.0;  // E[1/v]
};

/// E[(s - L(x))^2] under the mean-field posterior.
inline double expected_squared_residual(const ObservationMoments& m) {
  const auto region = observation_region(m.s, m.x_mean, m.alpha_mean, m.beta_mean);
  switch (region) {
    case ObservationRegion::flat:
      return m.s * m.s;
    case ObservationRegion::identity: {
      const double d = m.s - m.x_mean;
      return d * d + m.x_variance;
    }
    case ObservationRegion::recruitment:
      break;
  }
  const double x2 = m.x_mean * m.x_mean + m.x_variance;
  const double a2 = m.alpha_mean * m.alpha_mean + m.alpha_variance;
  const double d = m.s - m.alpha_mean * m.x_mean - m.beta_mean;
  return d * d + a2 * x2 - m.alpha_mean * m.alpha_mean * m.x_mean * m.x_mean + m.beta_variance;
}

/// Message toward the observation variance: v^(-1/2) exp(-E[r^2] / (2 v)).
inline InverseGammaMessage observation_variance_message(const ObservationMoments& m) {
  return InverseGammaMessage::likelihood(-0.5, 0.5 * expected_squared_residual(m));
}

struct SlopeOffsetMessages {
  GaussianMessage alpha = GaussianMessage::vague();
  GaussianMessage beta = GaussianMessage::vague();
};

/// Messages toward alpha and beta. Only the recruitment piece depends on them;
/// slices attributed to the flat or identity pieces send vague messages.
inline SlopeOffsetMessages observation_slope_offset_messages(const ObservationMoments& m) {
  SlopeOffsetMessages out;
  if (observation_region(m.s, m.x_mean, m.alpha_mean, m.beta_mean) !=
      ObservationRegion::recruitment)
    return out;
  const double tau = m.inv_variance_mean;
  const double x2 = m.x_mean * m.x_mean + m.x_variance;
  if (x2 > 0.0)
    out.alpha = GaussianMessage::from_natural(tau * x2, tau * m.x_mean * (m.s - m.beta_mean));
  out.beta = GaussianMessage::from_natural(tau, tau * (m.s - m.alpha_mean * m.x_mean));
  return out;
}

/// Message toward the received level x (a Gaussian in x, or vague on the flat piece).
inline GaussianMessage observation_input_message(const ObservationMoments& m) {
  const double tau = m.inv_variance_mean;
  switch (observation_region(m.s, m.x_mean, m.alpha_mean, m.beta_mean)) {
    case ObservationRegion::flat:
      return GaussianMessage::vague();
    case ObservationRegion::identity:
      return GaussianMessage::from_natural(tau, tau * m.s);
    case ObservationRegion::recruitment:
      break;
  }
  const double a2 = m.alpha_mean * m.alpha_mean + m.alpha_variance;
  return GaussianMessage::from_natural(tau * a2, tau * m.alpha_mean * (m.s - m.beta_mean));
}

/// Message toward the observed level s: N(E[L(x)], 1/E[1/v]).
inline GaussianMessage observation_output_message(const ObservationMoments& m) {
  double predicted = 0.0;
  switch (observation_region(m.s, m.x_mean, m.alpha_mean, m.beta_mean)) {
    case ObservationRegion::flat:
      predicted = 0.0;
      break;
    case ObservationRegion::identity:
      predicted = m.x_mean;
      break;
    case ObservationRegion::recruitment:
      predicted = m.alpha_mean * m.x_mean + m.beta_mean;
      break;
  }
  return GaussianMessage(predicted, 1.0 / m.inv_variance_mean);
}

/// Message toward the gain-transition precision from an observed gain change.
inline GammaMessage transition_precision_message(double expected_squared_step) {
  return GammaMessage::likelihood(1.5, 0.5 * expected_squared_step);
}

}  // namespace hlc
