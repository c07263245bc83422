#include <gtest/gtest.h>

#include <sstream>

#include "hlc/dist/sampling.hpp"
#include "hlc/sp/characterize.hpp"
#include "hlc/sp/message_filter.hpp"

using namespace hlc;

TEST(GainRecursion, SingleStepExamples) {
  const Theta theta;  // alpha 2, beta -90, vartheta 10, gamma 1
  GainState g = kalman_step({0.0, 4.0}, 60.0, theta);
  EXPECT_NEAR(g.mean, 10.0, 1e-12);
  EXPECT_NEAR(g.variance, 1.666666666666667, 1e-12);
  g = kalman_step({10.0, 1.0}, 85.0, theta);
  EXPECT_NEAR(g.mean, 7.777777777777778, 1e-12);
  EXPECT_NEAR(g.variance, 1.1111111111111112, 1e-12);
  g = kalman_step({5.0, 2.0}, 95.0, theta);  // identity region
  EXPECT_NEAR(g.mean, 3.846153846153846, 1e-12);
  EXPECT_NEAR(g.variance, 2.3076923076923075, 1e-12);
}

TEST(GainRecursion, SequenceMatchesReference) {
  const std::vector<double> levels{50, 55, 70, 80, 80, 40, 40, 95};
  const double mean[] = {19.995001749387715, 18.539692325636697, 14.305821427386334, 10.925966245330129,
                         8.38044125318499,   16.093287344895643, 20.22193211098717,  16.631440820328045};
  const double var[] = {2.4993752186729945, 1.4582248530568755, 1.239468219932238,  1.1812866528537753,
                        1.1648969688301578, 1.1602062078195594, 1.1588576296231574, 1.775543143431039};
  const auto out = run_sequence(levels, Theta{});
  ASSERT_EQ(out.size(), levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    EXPECT_NEAR(out[k].mean, mean[k], 1e-9) << k;
    EXPECT_NEAR(out[k].variance, var[k], 1e-9) << k;
  }
}

TEST(GainRecursion, ZeroGainPrecisionIsRejected) {
  Theta t;
  t.gain_precision = 0.0;
  EXPECT_THROW(kalman_step({0.0, 1.0}, 60.0, t), NumericalError);
}

TEST(GainRecursion, ConvergesInOneStepFromVaguePrior) {
  const GainState g = kalman_step({0.0, 1e4}, 80.0, Theta{});
  EXPECT_NEAR(g.mean, 5.0, 0.01);
}

TEST(MessagePassing, MatchesClosedFormOnRandomDraws) {
  Rng rng(20240611);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Theta t;
    t.hearing.alpha = 1.2 + 2.8 * rng.uniform();
    t.hearing.beta = -150.0 + 120.0 * rng.uniform();
    t.obs_variance = 0.5 + 30.0 * rng.uniform();
    t.gain_precision = 0.05 + 5.0 * rng.uniform();
    const GainState prior{-20.0 + 60.0 * rng.uniform(), 0.1 + 50.0 * rng.uniform()};
    const double s = 10.0 + 100.0 * rng.uniform();
    const GainState a = kalman_step(prior, s, t);
    const GainState b = sp_message_step(prior, s, t);
    worst_mean = std::max(worst_mean, std::abs(a.mean - b.mean) / std::max(1.0, std::abs(a.mean)));
    worst_var = std::max(worst_var, std::abs(a.variance - b.variance) / a.variance);
  }
  EXPECT_LT(worst_mean, 1e-9);
  EXPECT_LT(worst_var, 1e-9);
}

TEST(MessagePassing, FilterReusesSlice) {
  const Theta theta;
  MessagePassingFilter f(theta);
  GainState a{0.0, 1e4}, b{0.0, 1e4};
  for (double s : {50.0, 55.0, 70.0, 80.0, 95.0, 40.0}) {
    a = f.step(a, s);
    b = kalman_step(b, s, theta);
    EXPECT_NEAR(a.mean, b.mean, 1e-9);
    EXPECT_NEAR(a.variance, b.variance, 1e-9);
  }
}

TEST(MessagePassing, UnconstrainedModelRestoresEachFrame) {
  const Theta theta;
  MessagePassingFilter f(theta, ModelId::alternative_unconstrained_gain);
  const GainState g = f.step({30.0, 1.0}, 60.0);
  // the previous gain is ignored: the N(0, 1e6) prior meets the
  // restoring likelihood N(15, vartheta / alpha^2)
  const double lik_prec = 4.0 / theta.obs_variance, prior_prec = 1e-6;
  EXPECT_NEAR(g.mean, 15.0 * lik_prec / (lik_prec + prior_prec), 1e-9);
  EXPECT_NEAR(g.variance, 1.0 / (lik_prec + prior_prec), 1e-9);
}

TEST(Characterize, ReferenceSetting) {
  const CompressionCharacterization c = characterize(Theta{}, 55.0, 80.0);
  EXPECT_NEAR(c.compression_ratio, 2.0, 1e-9);
  EXPECT_NEAR(c.steady_gain_per_level.at(55.0), 17.5, 1e-9);
  EXPECT_NEAR(c.steady_gain_per_level.at(80.0), 5.0, 1e-9);
  EXPECT_NEAR(c.steady_variance_per_level.at(55.0), 1.1583123951777, 1e-9);
  EXPECT_EQ(c.attack_steps, 4);
  EXPECT_EQ(c.release_steps, 3);
}

TEST(Characterize, RatioEqualsSlope) {
  struct Case {
    double alpha, beta, low, high;
  };
  for (const Case& k : {Case{1.5, -40.0, 37.333333333333336, 69.33333333333333}, Case{2.0, -90.0, 55.0, 80.0},
                        Case{2.5, -150.0, 68.0, 92.0}, Case{3.0, -150.0, 55.0, 70.0}}) {
    Theta t;
    t.hearing = {k.alpha, k.beta};
    EXPECT_NEAR(characterize(t, k.low, k.high).compression_ratio, k.alpha, 1e-9) << k.alpha;
  }
}

TEST(Characterize, LevelsOutsideRegionAreRejected) {
  EXPECT_THROW(characterize(Theta{}, 40.0, 80.0), CharacterizationError);
  EXPECT_THROW(characterize(Theta{}, 55.0, 90.0), CharacterizationError);
  EXPECT_THROW(characterize(Theta{}, 80.0, 55.0), CharacterizationError);
}

TEST(Characterize, StrongerTransitionPrecisionSlowsResponse) {
  Theta slow;
  slow.gain_precision = 20.0;
  const auto fast = characterize(Theta{}, 55.0, 80.0);
  const auto c = characterize(slow, 55.0, 80.0);
  EXPECT_GT(c.attack_steps, fast.attack_steps);
  EXPECT_GT(c.release_steps, fast.release_steps);
  EXPECT_NEAR(c.compression_ratio, 2.0, 1e-9);
}

TEST(Characterize, ResponseToStepIsMonotone) {
  const Theta theta;
  GainState g = steady_state(55.0, theta);
  double prev = g.mean;
  for (int k = 0; k < 60; ++k) {
    g = kalman_step(g, 80.0, theta);
    EXPECT_LE(g.mean, prev + 1e-12);
    prev = g.mean;
  }
}

TEST(Characterize, ReportAndTrace) {
  std::ostringstream os;
  print(os, characterize(Theta{}, 55.0, 80.0), 5.0);
  const std::string r = os.str();
  EXPECT_NE(r.find("compression_ratio = 2"), std::string::npos);
  EXPECT_NE(r.find("attack_ms = 20"), std::string::npos);
  EXPECT_NE(r.find("release_ms = 15"), std::string::npos);

  const std::vector<double> levels{55, 80};
  const auto gains = run_sequence(levels, Theta{});
  std::ostringstream csv;
  write_trace_csv(csv, levels, gains);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,s_dB,g_mean_dB,g_sd_dB");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
  EXPECT_THROW(write_trace_csv(csv, levels, std::span<const GainState>(gains).first(1)), ArgumentError);
}
