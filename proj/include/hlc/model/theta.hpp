#pragma once

#include <string>

#include "hlc/dist/messages.hpp"
#include "hlc/error.hpp"
#include "hlc/model/zurek.hpp"

namespace hlc {

/// Tuning parameters of the compensation model.
struct Theta {
  HearingLossParams hearing;
  double obs_variance = 10.0;   // dB^2, strictness of loudness restoration
  double gain_precision = 1.0;  // dB^-2, penalty on gain changes

  void validate() const {
    if (!std::isfinite(hearing.alpha) || !std::isfinite(hearing.beta))
      throw ArgumentError("theta: alpha and beta must be finite");
    if (hearing.alpha == 0.0) throw ArgumentError("theta: alpha must be non-zero");
    if (!std::isfinite(obs_variance) || obs_variance <= 0.0)
      throw ArgumentError("theta: observation variance must be positive");
    if (!std::isfinite(gain_precision) || gain_precision < 0.0)
      throw ArgumentError("theta: gain precision must be non-negative");
  }

  friend bool operator==(const Theta&, const Theta&) = default;
};

/// Conjugate priors over the four tuning parameters.
struct ThetaPriors {
  GaussianMessage alpha{1.5, 0.2};
  GaussianMessage beta{-50.0, 100.0};
  InverseGammaMessage obs_variance{12.0, 110.0};
  GammaMessage gain_precision{10.0, 1.0};
};

/// Reference model (gain-transition constraint present) or the nested
/// alternative in which gains evolve without constraint.
enum class ModelId { reference, alternative_unconstrained_gain };

inline std::string to_string(ModelId m) {
  return m == ModelId::reference ? "reference" : "alternative-unconstrained-gain";
}

// Default prior over the initial gain g0.
inline GaussianMessage default_initial_gain_prior() { return {0.0, 1e4}; }

}  // namespace hlc
