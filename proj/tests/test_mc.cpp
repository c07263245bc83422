#include <gtest/gtest.h>

#include <sstream>

#include "hlc/mc/bayes_factor.hpp"
#include "hlc/model/oracle.hpp"
#include "support/quadrature.hpp"

using namespace hlc;

TEST(BayesFactor, PosteriorEqualToPriorGivesZero) {
  const GammaMessage p(10.0, 1.0);
  const BFResult r = bayes_factor(p, p);
  EXPECT_NEAR(r.ratio, 1.0, 1e-14);
  EXPECT_NEAR(r.deci_hartley, 0.0, 1e-12);
}

TEST(BayesFactor, ExponentialMassesInClosedForm) {
  // P(gamma <= w) = 1 - exp(-rate w) for shape 1
  const NestingSpec spec{"gain_precision", 0.01};
  const double rate = 10.48;
  const BFResult r = bayes_factor(GammaMessage(1.0, rate), GammaMessage(1.0, 1.0), spec);
  const double expected = -std::expm1(-rate * 0.01) / -std::expm1(-0.01);
  EXPECT_NEAR(r.ratio, expected, 1e-12 * expected);
  EXPECT_NEAR(r.ratio, 10.0, 0.01);
  EXPECT_NEAR(r.deci_hartley, 10.0 * std::log10(expected), 1e-10);
}

TEST(BayesFactor, SharpPosteriorAwayFromNestedSet) {
  // posterior with mean 0.94 and variance 0.008 against the Gam(10, 1) prior
  const GammaMessage post(0.94 * 0.94 / 0.008, 0.94 / 0.008);
  const BFResult r = bayes_factor(post, GammaMessage(10.0, 1.0));
  EXPECT_NEAR(r.posterior_mass_in_O, 2.46779504605406651e-30, 1e-9 * 2.4678e-30);
  EXPECT_NEAR(r.prior_mass_in_O, 2.09424853999736112e-13, 1e-9 * 2.0942e-13);
  EXPECT_NEAR(r.deci_hartley, -169.28719133272330, 1e-8);
}

TEST(BayesFactor, SwappingArgumentsNegates) {
  const GammaMessage a(4.0, 2.0), b(30.0, 3.0);
  EXPECT_NEAR(bayes_factor(a, b).deci_hartley, -bayes_factor(b, a).deci_hartley, 1e-10);
}

TEST(BayesFactor, InvariantToRescalingPrecision) {
  const GammaMessage post(25.0, 40.0), prior(10.0, 1.0);
  const BFResult a = bayes_factor(post, prior, {"gain_precision", 0.25});
  const BFResult b = bayes_factor(GammaMessage(25.0, 4.0), GammaMessage(10.0, 0.1), {"gain_precision", 2.5});
  EXPECT_NEAR(a.deci_hartley, b.deci_hartley, 1e-9);
}

TEST(BayesFactor, LogAndDirectAgree) {
  for (double shape : {0.5, 2.0, 10.0, 60.0})
    for (double rate : {0.5, 4.0, 40.0}) {
      const GammaMessage post(shape, rate), prior(3.0, 1.0);
      const BFResult a = bayes_factor(post, prior), b = bayes_factor_direct(post, prior);
      EXPECT_NEAR(a.log_ratio, b.log_ratio, 1e-9 * std::max(1.0, std::abs(a.log_ratio))) << shape << " " << rate;
    }
}

TEST(BayesFactor, DirectRefusesUnderflowLogSpaceDoesNot) {
  const GammaMessage prior(200.0, 1.0);  // P(200, 0.25) is far below 1e-300
  const GammaMessage post(150.0, 1.0);
  EXPECT_THROW(bayes_factor_direct(post, prior), NumericalError);
  const BFResult r = bayes_factor(post, prior);
  EXPECT_TRUE(std::isfinite(r.log_ratio));
  EXPECT_GT(r.deci_hartley, 0.0);
}

TEST(BayesFactor, CdfMatchesQuadrature) {
  for (double a : {0.5, 1.0, 2.0, 10.0, 110.0})
    for (double x : {0.1, 0.5, 2.0, 10.0, 50.0, 120.0}) {
      const double q = test::gamma_mass_by_quadrature(a, x);
      EXPECT_NEAR(gamma_cdf(GammaMessage(a, 1.0), x), q, 1e-8 * std::max(q, 1e-300) + 1e-300) << a << " " << x;
    }
}

TEST(BayesFactor, RejectsBadNesting) {
  EXPECT_THROW(bayes_factor(GammaMessage(1, 1), GammaMessage(1, 1), {"gain_precision", 0.0}), ArgumentError);
}

TEST(CompareModels, EmptyDataIsUndecided) {
  const BFResult r = compare_models(TrainingSet{}, ThetaPriors{});
  EXPECT_NEAR(r.deci_hartley, 0.0, 1e-12);
}

TEST(CompareModels, SignFollowsGainDynamics) {
  Theta theta;
  theta.hearing = {2.0, -90.0};
  GainWalkConfig walk;
  walk.seed = 1;
  const TrainingSet constrained = generate_constrained_data(theta, walk);
  OracleDataConfig oc;
  oc.seed = 1;
  const TrainingSet unconstrained = generate_unconstrained_data(theta.hearing, oc);

  const BFResult c = compare_models(constrained, ThetaPriors{});
  const BFResult u = compare_models(unconstrained, ThetaPriors{});
  EXPECT_LT(c.deci_hartley, 0.0);
  EXPECT_GT(u.deci_hartley, 0.0);
  EXPECT_GT(u.deci_hartley, c.deci_hartley);
}

TEST(CompareModels, ReportKeys) {
  std::ostringstream os;
  write_report(os, bayes_factor(GammaMessage(5, 2), GammaMessage(10, 1)));
  const std::string r = os.str();
  for (const char* key : {"BF_ratio = ", "BF_dHart = ", "posterior_mass_in_O = ", "prior_mass_in_O = "})
    EXPECT_NE(r.find(key), std::string::npos) << key;
}
