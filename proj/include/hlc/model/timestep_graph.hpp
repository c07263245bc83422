#pragma once

#include <variant>

#include "hlc/ffg/schedule.hpp"
#include "hlc/model/theta.hpp"

namespace hlc {

// Theta fixed to known values (signal processing).
struct ClampedTheta {
  Theta theta;
};

// Theta inferred by variational message passing (parameter estimation).
struct VariationalTheta {
  ThetaPriors priors;
};

using ThetaMode = std::variant<ClampedTheta, VariationalTheta>;

inline constexpr ffg::EdgeId kNoEdge = static_cast<ffg::EdgeId>(-1);
inline constexpr ffg::NodeId kNoNode = static_cast<ffg::NodeId>(-1);

/// One time slice of the compensation model with handles to the edges and
/// value nodes a caller needs to drive it.
struct TimestepGraph {
  ffg::Graph graph;
  ModelId model = ModelId::reference;

  // gain chain
  ffg::EdgeId g_prev = kNoEdge;     // g_{k-1}
  ffg::EdgeId g_pred = kNoEdge;     // g_{k-1} + increment
  ffg::EdgeId g_next = kNoEdge;     // g_k leaving the slice
  ffg::EdgeId increment = kNoEdge;  // transition noise
  ffg::EdgeId g_branch = kNoEdge;   // g_k into the level sum
  ffg::EdgeId received = kNoEdge;   // s_k + g_k
  ffg::EdgeId level = kNoEdge;      // s_k
  ffg::EdgeId level_branch = kNoEdge;
  ffg::EdgeId level_obs = kNoEdge;  // s_k at the observation factor

  // signal-processing only
  ffg::EdgeId perceived = kNoEdge;  // L(s_k + g_k)
  ffg::EdgeId obs_noise = kNoEdge;

  // parameter edges (gamma, vartheta, (alpha, beta)) at the factors
  ffg::EdgeId gamma = kNoEdge;
  ffg::EdgeId obs_variance = kNoEdge;
  ffg::EdgeId hearing = kNoEdge;

  // equality-chain edges (variational mode): ' enters from the previous
  // slice, '' leaves toward the next one
  ffg::EdgeId gamma_in = kNoEdge, gamma_out = kNoEdge;
  ffg::EdgeId obs_variance_in = kNoEdge, obs_variance_out = kNoEdge;
  ffg::EdgeId hearing_in = kNoEdge, hearing_out = kNoEdge;

  // value nodes
  ffg::NodeId g_prev_node = kNoNode;  // prior (SP) or clamp (PE)
  ffg::NodeId g_next_node = kNoNode;  // clamp (PE) only
  ffg::NodeId level_node = kNoNode;
  ffg::NodeId gamma_node = kNoNode;
  ffg::NodeId obs_variance_node = kNoNode;
  ffg::NodeId hearing_node = kNoNode;

  // factor nodes used by schedules
  ffg::NodeId transition_noise = kNoNode;
  ffg::NodeId transition_sum = kNoNode;
  ffg::NodeId gain_equality = kNoNode;
  ffg::NodeId level_sum = kNoNode;
  ffg::NodeId curve = kNoNode;
  ffg::NodeId noise_sum = kNoNode;
  ffg::NodeId obs_noise_node = kNoNode;
  ffg::NodeId level_equality = kNoNode;
  ffg::NodeId observation = kNoNode;
  ffg::NodeId gamma_equality = kNoNode, obs_variance_equality = kNoNode, hearing_equality = kNoNode;

  ffg::Schedule schedule;
};

namespace detail {

inline void build_clamped(TimestepGraph& t, const Theta& theta) {
  using namespace ffg;
  Graph& g = t.graph;
  const bool reference = t.model == ModelId::reference;

  t.g_prev = g.add_edge("g[k-1]");
  t.g_pred = g.add_edge("g'[k]");
  t.g_next = g.add_edge("g[k]");
  t.g_branch = g.add_edge("g[k] branch");
  t.received = g.add_edge("s[k]+g[k]");
  t.perceived = g.add_edge("L(s[k]+g[k])");
  t.level_obs = g.add_edge("s[k] (observation)");
  t.level_branch = g.add_edge("s[k] (branch)");
  t.level = g.add_edge("s[k]");
  t.obs_noise = g.add_edge("observation noise");
  t.obs_variance = g.add_edge("vartheta");
  t.hearing = g.add_edge("alpha,beta");
  EdgeId noise_mean = g.add_edge("0 (observation noise mean)");

  t.g_prev_node = g.add_prior(t.g_prev, default_initial_gain_prior(), "prior g[k-1]");
  if (reference) {
    t.increment = g.add_edge("gain increment");
    t.gamma = g.add_edge("gamma");
    EdgeId inc_mean = g.add_edge("0 (increment mean)");
    t.gamma_node = g.add_clamp(t.gamma, DeltaMessage(theta.gain_precision), "gamma");
    g.add_clamp(inc_mean, DeltaMessage(0.0), "0");
    t.transition_noise =
        g.add_gaussian_noise(t.increment, inc_mean, t.gamma, NoiseParam::precision, "N(0, 1/gamma)");
    t.transition_sum = g.add_addition(t.g_prev, t.increment, t.g_pred, "+ (gain transition)");
  } else {
    // g_{k-1} stays dangling on one side: nothing flows back to it
    g.add_prior(t.g_pred, GaussianMessage(0.0, 1e6), "vague prior g[k]");
  }
  t.gain_equality = g.add_equality(t.g_pred, t.g_next, t.g_branch, "= (gain)");
  t.level_sum = g.add_addition(t.g_branch, t.level_branch, t.received, "+ (s+g)");
  t.hearing_node = g.add_clamp(t.hearing, HearingParamsDelta{theta.hearing}, "alpha,beta");
  t.curve = g.add_zurek(t.received, t.perceived, t.hearing, "L");
  t.noise_sum = g.add_addition(t.perceived, t.obs_noise, t.level_obs, "+ (observation)");
  t.obs_variance_node = g.add_clamp(t.obs_variance, DeltaMessage(theta.obs_variance), "vartheta");
  g.add_clamp(noise_mean, DeltaMessage(0.0), "0");
  t.obs_noise_node =
      g.add_gaussian_noise(t.obs_noise, noise_mean, t.obs_variance, NoiseParam::variance, "N(0, vartheta)");
  t.level_equality = g.add_equality(t.level_obs, t.level, t.level_branch, "= (s)");
  t.level_node = g.add_clamp(t.level, DeltaMessage(0.0), "s[k]");

  // Thirteen updates per time step, in the order of the signal-processing figure.
  Schedule& s = t.schedule;
  if (reference) {
    s.add(t.gamma_node, t.gamma);                           // 1
    s.add(t.transition_noise, t.increment);                 // 2
    s.add(t.transition_sum, t.g_pred);                      // 3
  }
  s.add(t.level_node, t.level);                             // 4
  s.add(t.level_equality, t.level_branch);                  // 5
  s.add(t.hearing_node, t.hearing);                         // 6
  s.add(t.obs_variance_node, t.obs_variance);               // 7
  s.add(t.level_equality, t.level_obs);                     // 8
  s.add(t.obs_noise_node, t.obs_noise);                     // 9
  s.add(t.noise_sum, t.perceived);                          // 10
  s.add(t.curve, t.received);                               // 11
  s.add(t.level_sum, t.g_branch);                           // 12
  s.add(t.gain_equality, t.g_next);                         // 13
}

inline void build_variational(TimestepGraph& t, const ThetaPriors& priors) {
  using namespace ffg;
  constexpr Rule vmp = Rule::variational;
  Graph& g = t.graph;
  const bool reference = t.model == ModelId::reference;

  t.g_pred = g.add_edge("g'[k]");
  t.g_next = g.add_edge("g[k]");
  t.g_branch = g.add_edge("g[k] branch");
  t.received = g.add_edge("s[k]+g[k]");
  t.level_obs = g.add_edge("s[k] (observation)");
  t.level_branch = g.add_edge("s[k] (branch)");
  t.level = g.add_edge("s[k]");
  t.obs_variance_in = g.add_edge("vartheta'");
  t.obs_variance_out = g.add_edge("vartheta''");
  t.obs_variance = g.add_edge("vartheta");
  t.hearing_in = g.add_edge("alpha',beta'");
  t.hearing_out = g.add_edge("alpha'',beta''");
  t.hearing = g.add_edge("alpha,beta");

  if (reference) {
    t.g_prev = g.add_edge("g[k-1]");
    t.increment = g.add_edge("gain increment");
    t.gamma_in = g.add_edge("gamma'");
    t.gamma_out = g.add_edge("gamma''");
    t.gamma = g.add_edge("gamma");
    EdgeId inc_mean = g.add_edge("0 (increment mean)");
    g.add_prior(t.gamma_in, priors.gain_precision, "p(gamma)");
    t.gamma_equality = g.add_equality(t.gamma_in, t.gamma_out, t.gamma, "= (gamma)");
    t.g_prev_node = g.add_clamp(t.g_prev, DeltaMessage(0.0), "g[k-1]");
    g.add_clamp(inc_mean, DeltaMessage(0.0), "0");
    t.transition_noise =
        g.add_gaussian_noise(t.increment, inc_mean, t.gamma, NoiseParam::precision, "N(0, 1/gamma)");
    t.transition_sum = g.add_addition(t.g_prev, t.increment, t.g_pred, "+ (gain transition)");
  } else {
    g.add_prior(t.g_pred, GaussianMessage(0.0, 1e6), "vague prior g[k]");
  }
  t.gain_equality = g.add_equality(t.g_pred, t.g_next, t.g_branch, "= (gain)");
  t.g_next_node = g.add_clamp(t.g_next, DeltaMessage(0.0), "g[k]");
  t.level_sum = g.add_addition(t.g_branch, t.level_branch, t.received, "+ (s+g)");

  g.add_prior(t.obs_variance_in, priors.obs_variance, "p(vartheta)");
  t.obs_variance_equality =
      g.add_equality(t.obs_variance_in, t.obs_variance_out, t.obs_variance, "= (vartheta)");
  g.add_prior(t.hearing_in, HearingParamsMessage{priors.alpha, priors.beta}, "p(alpha,beta)");
  t.hearing_equality = g.add_equality(t.hearing_in, t.hearing_out, t.hearing, "= (alpha,beta)");

  // L, the observation-noise sum and its Gaussian merged into one factor
  t.observation = g.add_observation(t.received, t.level_obs, t.hearing, t.obs_variance,
                                    "N(s | L(s+g), vartheta)");
  t.level_equality = g.add_equality(t.level_obs, t.level, t.level_branch, "= (s)");
  t.level_node = g.add_clamp(t.level, DeltaMessage(0.0), "s[k]");

  Schedule& s = t.schedule;
  // parameter beliefs into the slice
  if (reference) s.add(t.gamma_equality, t.gamma);
  s.add(t.obs_variance_equality, t.obs_variance);
  s.add(t.hearing_equality, t.hearing);
  // left schedule: observations toward parameters
  if (reference) {
    s.add(t.g_prev_node, t.g_prev);                  // 1
    s.add(t.transition_noise, t.increment, vmp);     // 2
    s.add(t.transition_sum, t.g_pred);               // 3
  }
  s.add(t.g_next_node, t.g_next);                    // 4
  s.add(t.gain_equality, t.g_branch);                // 5
  s.add(t.level_node, t.level);                      // 6
  s.add(t.level_equality, t.level_branch);           // 7
  s.add(t.level_sum, t.received);                    // 8
  s.add(t.level_equality, t.level_obs);              // 13
  s.add(t.observation, t.received, vmp);             // 9
  s.add(t.level_sum, t.g_branch);                    // 10
  if (reference) {
    s.add(t.gain_equality, t.g_pred);                // 11
    s.add(t.transition_sum, t.increment);            // 12
  }
  s.add(t.observation, t.level_obs, vmp);            // 14
  if (reference) s.add(t.transition_noise, t.gamma, vmp);  // 15
  s.add(t.observation, t.obs_variance, vmp);         // 16
  s.add(t.observation, t.hearing, vmp);              // 17
  // right schedule: mix into the outgoing chain edges
  if (reference) s.add(t.gamma_equality, t.gamma_out);
  s.add(t.obs_variance_equality, t.obs_variance_out);
  s.add(t.hearing_equality, t.hearing_out);
}

}  // namespace detail

/// Builds one time slice. Clamped mode yields the signal-processing graph
/// and its 13-step sum-product schedule; variational mode yields the
/// parameter-estimation slice with (s, g_{k-1}, g_k) clamped and parameter
/// equality chains whose incoming ends carry the priors.
inline TimestepGraph build_timestep_graph(ModelId model, const ThetaMode& mode) {
  TimestepGraph t;
  t.model = model;
  if (auto* c = std::get_if<ClampedTheta>(&mode)) {
    c->theta.validate();
    detail::build_clamped(t, c->theta);
  } else {
    detail::build_variational(t, std::get<VariationalTheta>(mode).priors);
  }
  ffg::validate(t.graph, t.schedule);
  return t;
}

}  // namespace hlc
