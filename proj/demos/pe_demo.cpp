// Learns the hearing-loss parameters from simulated appraisals, then scores
// the constrained model against the unconstrained one.

#include <cstdio>
#include <iostream>

#include "hlc/mc/bayes_factor.hpp"
#include "hlc/model/oracle.hpp"
#include "hlc/pe/estimate.hpp"

int main() {
  const hlc::Theta truth;  // alpha 2, beta -90
  hlc::OracleDataConfig oc;
  oc.steps = 2000;
  const hlc::TrainingSet data = hlc::generate_oracle_data(truth.hearing, oc);

  const hlc::ThetaPriors priors;
  const hlc::PosteriorSet q = hlc::estimate(data, priors);
  std::printf("true alpha %.2f beta %.1f\n", truth.hearing.alpha, truth.hearing.beta);
  hlc::write_report(std::cout, q);

  const double constrained = hlc::compare_models(hlc::generate_constrained_data(truth), priors).deci_hartley;
  const double unconstrained =
      hlc::compare_models(hlc::generate_unconstrained_data(truth.hearing), priors).deci_hartley;
  std::printf("\nlog evidence ratio (dHart): constrained data %.2f, unconstrained data %.2f\n", constrained,
              unconstrained);
}
