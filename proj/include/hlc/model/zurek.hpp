#pragma once

#include <cmath>
#include <utility>

#include "hlc/dist/messages.hpp"
#include "hlc/error.hpp"

namespace hlc {

/// Slope and offset of the piecewise-linear loudness-recruitment curve.
struct HearingLossParams {
  double alpha = 2.0;   // slope inside the recruitment region
  double beta = -90.0;  // offset, dB

  friend bool operator==(const HearingLossParams&, const HearingLossParams&) = default;
};

struct Thresholds {
  double hearing;      // HT = -beta / alpha
  double recruitment;  // RT = -beta / (alpha - 1)
};

inline Thresholds thresholds(const HearingLossParams& p) {
  if (p.alpha == 0.0 || p.alpha == 1.0)
    throw ArgumentError("thresholds undefined for alpha in {0, 1}, got " +
                        detail::fmt(p.alpha));
  return {-p.beta / p.alpha, -p.beta / (p.alpha - 1.0)};
}

/// Perceived level for a received level x (both dB).
///
///   0            for x < HT
///   alpha x + b  for HT <= x < RT
///   x            otherwise
inline double zurek_L(double x, const HearingLossParams& p) {
  const double recruited = p.alpha * x + p.beta;
  // For alpha > 1 the three pieces are ordered, so max/min reproduce the
  // branch conditions while staying continuous at both breakpoints.
  if (p.alpha > 1.0) {
    if (recruited < 0.0) return 0.0;
    return recruited < x ? recruited : x;
  }
  if (p.alpha == 1.0) {
    // RT is at infinity; the identity branch is never reached
    return x < -p.beta ? 0.0 : recruited;
  }
  const Thresholds t = thresholds(p);
  if (x < t.hearing) return 0.0;
  if (x < t.recruitment) return recruited;
  return x;
}

/// Slope of the region selected by an observed level: alpha below the
/// recruitment threshold, 1 at or above it.
inline double active_slope(double level, const HearingLossParams& p) {
  if (p.alpha == 1.0) throw ArgumentError("active slope undefined for alpha == 1");
  return level < p.beta / (1.0 - p.alpha) ? p.alpha : 1.0;
}

/// Gain that makes the impaired listener hear s at its original level,
/// i.e. L(s + g) = s. Inputs that cannot be restored (s < 0, the flat branch)
/// get the minimal gain that lifts s + g to the hearing threshold.
inline double oracle_gain(double s, const HearingLossParams& target) {
  const Thresholds t = thresholds(target);
  if (s >= t.recruitment) return 0.0;
  if (s < 0.0) return t.hearing - s;
  return ((1.0 - target.alpha) * s - target.beta) / target.alpha;
}

}  // namespace hlc
