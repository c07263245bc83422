#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include "hlc/dist/special.hpp"
#include "hlc/pe/estimate.hpp"

namespace hlc {

/// Nested set O = [0, omega] for the gain-transition precision.
struct NestingSpec {
  std::string parameter = "gain_precision";
  double omega = 0.25;

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ArgumentError("nesting: omega must be positive");
  }
};

/// Encompassing-prior Bayes factor of the nested model over the reference.
struct BFResult {
  double ratio = 1.0;
  double deci_hartley = 0.0;  // 10 log10(ratio)
  double log_ratio = 0.0;     // natural log, finite even when ratio under/overflows
  double posterior_mass_in_O = 1.0;
  double prior_mass_in_O = 1.0;
  double log_posterior_mass_in_O = 0.0;
  double log_prior_mass_in_O = 0.0;
};

inline constexpr double kMinDirectMass = 1e-300;

/// Ratio of posterior to prior probability mass inside O, evaluated in log space.
inline BFResult bayes_factor(const GammaMessage& posterior, const GammaMessage& prior, const NestingSpec& spec = {}) {
  spec.validate();
  BFResult r;
  r.log_posterior_mass_in_O = log_gamma_cdf(posterior, spec.omega);
  r.log_prior_mass_in_O = log_gamma_cdf(prior, spec.omega);
  if (!std::isfinite(r.log_prior_mass_in_O))
    throw NumericalError("bayes factor: prior has no mass in O = [0, " + detail::fmt(spec.omega) + "]");
  r.log_ratio = r.log_posterior_mass_in_O - r.log_prior_mass_in_O;
  r.ratio = std::exp(r.log_ratio);
  r.deci_hartley = 10.0 * r.log_ratio / std::log(10.0);
  r.posterior_mass_in_O = std::exp(r.log_posterior_mass_in_O);
  r.prior_mass_in_O = std::exp(r.log_prior_mass_in_O);
  return r;
}

/// Same ratio from the plain CDF values. Refuses when the prior mass
/// underflows; use bayes_factor (log space) there.
inline BFResult bayes_factor_direct(const GammaMessage& posterior, const GammaMessage& prior,
                                    const NestingSpec& spec = {}) {
  spec.validate();
  BFResult r;
  r.posterior_mass_in_O = gamma_cdf(posterior, spec.omega);
  r.prior_mass_in_O = gamma_cdf(prior, spec.omega);
  if (r.prior_mass_in_O < kMinDirectMass)
    throw NumericalError("bayes factor: prior mass in O is below 1e-300, evaluate in log space");
  r.ratio = r.posterior_mass_in_O / r.prior_mass_in_O;
  r.log_ratio = std::log(r.ratio);
  r.deci_hartley = 10.0 * std::log10(r.ratio);
  r.log_posterior_mass_in_O = std::log(r.posterior_mass_in_O);
  r.log_prior_mass_in_O = std::log(r.prior_mass_in_O);
  return r;
}

/// Estimates q(gamma) under the reference model, then scores the nested model.
inline BFResult compare_models(const TrainingSet& data, const ThetaPriors& priors, const NestingSpec& spec = {},
                               PEConfig cfg = {}) {
  cfg.model = ModelId::reference;
  const PosteriorSet q = estimate(data, priors, cfg);
  return bayes_factor(q.gain_precision, priors.gain_precision, spec);
}

inline void write_report(std::ostream& os, const BFResult& r) {
  os << "BF_ratio = " << detail::fmt(r.ratio) << "\n";
  os << "BF_dHart = " << detail::fmt(r.deci_hartley) << "\n";
  os << "posterior_mass_in_O = " << detail::fmt(r.posterior_mass_in_O) << "\n";
  os << "prior_mass_in_O = " << detail::fmt(r.prior_mass_in_O) << "\n";
  os << "log_posterior_mass_in_O = " << detail::fmt(r.log_posterior_mass_in_O) << "\n";
  os << "log_prior_mass_in_O = " << detail::fmt(r.log_prior_mass_in_O) << "\n";
}

}  // namespace hlc
