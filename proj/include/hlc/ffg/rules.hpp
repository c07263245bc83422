#pragma once

#include <optional>
#include <string>

#include "hlc/ffg/graph.hpp"
#include "hlc/model/observation.hpp"

namespace hlc::ffg {

// A message or belief a rule depends on has not been computed.
class MissingInput : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline const Message& require(const std::optional<Message>& m, const Graph& g, EdgeId e,
                              const char* what) {
  if (!m)
    throw MissingInput(std::string("missing ") + what + " on edge '" + g.edge(e).name + "'");
  return *m;
}

inline bool is_point(const Message& m) {
  return std::holds_alternative<DeltaMessage>(m) || std::holds_alternative<HearingParamsDelta>(m);
}

inline bool is_flat(const Message& m) {
  if (std::holds_alternative<Uninformative>(m)) return true;
  if (auto* g = std::get_if<GaussianMessage>(&m)) return g->is_vague();
  return false;
}

// Message of x + y for independent x, y.
inline Message sum(const Message& x, const Message& y) {
  if (is_flat(x) || is_flat(y)) return GaussianMessage::vague();
  auto dx = std::get_if<DeltaMessage>(&x);
  auto dy = std::get_if<DeltaMessage>(&y);
  auto gx = std::get_if<GaussianMessage>(&x);
  auto gy = std::get_if<GaussianMessage>(&y);
  if (dx && dy) return DeltaMessage(dx->point() + dy->point());
  if (dx && gy) return GaussianMessage(dx->point() + gy->mean(), gy->variance());
  if (gx && dy) return GaussianMessage(gx->mean() + dy->point(), gx->variance());
  if (gx && gy) return GaussianMessage(gx->mean() + gy->mean(), gx->variance() + gy->variance());
  throw UnsupportedRule("addition has no rule for " + describe(x) + " + " + describe(y));
}

// Message of z - y; a loudness-curve likelihood in z becomes one in x = z - y.
inline Message difference(const Message& z, const Message& y) {
  auto dy = std::get_if<DeltaMessage>(&y);
  if (auto* lz = std::get_if<ZurekLikelihood>(&z)) {
    if (!dy) throw UnsupportedRule("likelihood shift needs a point-mass addend");
    ZurekLikelihood out = *lz;
    out.shift += dy->point();
    return out;
  }
  if (is_flat(z) || is_flat(y)) return GaussianMessage::vague();
  auto dz = std::get_if<DeltaMessage>(&z);
  auto gz = std::get_if<GaussianMessage>(&z);
  auto gy = std::get_if<GaussianMessage>(&y);
  if (dz && dy) return DeltaMessage(dz->point() - dy->point());
  if (gz && dy) return GaussianMessage(gz->mean() - dy->point(), gz->variance());
  if (dz && gy) return GaussianMessage(dz->point() - gy->mean(), gy->variance());
  if (gz && gy) return GaussianMessage(gz->mean() - gy->mean(), gz->variance() + gy->variance());
  throw UnsupportedRule("addition has no rule for " + describe(z) + " - " + describe(y));
}

// Noise variance implied by a point-mass parameter message.
inline double noise_variance(const Message& param, NoiseParam kind) {
  auto d = std::get_if<DeltaMessage>(&param);
  if (!d) throw UnsupportedRule("sum-product through gaussian-noise needs a clamped parameter");
  if (kind == NoiseParam::precision) {
    if (d->point() <= 0.0)
      throw NumericalError("gaussian-noise precision must be positive for sum-product");
    return 1.0 / d->point();
  }
  return d->point();
}

// E[precision] of a parameter belief.
inline double expected_precision(const Message& param, NoiseParam kind) {
  if (kind == NoiseParam::precision) {
    if (auto* d = std::get_if<DeltaMessage>(&param)) return d->point();
    if (auto* g = std::get_if<GammaMessage>(&param)) return g->mean();
  } else {
    if (auto* d = std::get_if<DeltaMessage>(&param)) return 1.0 / d->point();
    if (auto* g = std::get_if<InverseGammaMessage>(&param)) return g->mean_inverse();
  }
  throw UnsupportedRule("no precision expectation for " + describe(param));
}

inline Message noise_param_message(NoiseParam kind, double expected_sq) {
  if (kind == NoiseParam::precision) return transition_precision_message(expected_sq);
  return InverseGammaMessage::likelihood(-0.5, 0.5 * expected_sq);
}

}  // namespace detail

/// Belief over an edge variable as used by variational rules: the product of
/// both directed messages. A point mass in either direction fixes the belief.
/// Before the reverse message exists (first VMP sweep) the available
/// direction stands in for the marginal.
inline Message belief(const Graph& g, EdgeId e) {
  auto fw = g.forward_or_uninformative(e);
  auto bw = g.backward_or_uninformative(e);
  if (fw && detail::is_point(*fw)) return *fw;
  if (bw && detail::is_point(*bw)) return *bw;
  if (fw && bw) return multiply(*fw, *bw);
  if (fw) return *fw;
  if (bw) return *bw;
  throw MissingInput("no belief available on edge '" + g.edge(e).name + "'");
}

/// Marginal of an edge: the normalized product of the two colliding messages.
inline Message marginal(const Graph& g, EdgeId e) {
  auto fw = g.forward_or_uninformative(e);
  auto bw = g.backward_or_uninformative(e);
  if (!fw) throw MissingInput("marginal of '" + g.edge(e).name + "' lacks the forward message");
  if (!bw) throw MissingInput("marginal of '" + g.edge(e).name + "' lacks the backward message");
  return multiply(*fw, *bw);
}

namespace detail {

inline ObservationMoments observation_moments(const Graph& g, const Node& n) {
  ObservationMoments m;
  const Message obs = belief(g, n.ports[1]);
  auto s = std::get_if<DeltaMessage>(&obs);
  if (!s) throw UnsupportedRule("variational observation rule needs the observed level clamped");
  m.s = s->point();
  const Moments x = moments(belief(g, n.ports[0]));
  m.x_mean = x.mean;
  m.x_variance = x.variance;
  const Message params = belief(g, n.ports[2]);
  if (auto* d = std::get_if<HearingParamsDelta>(&params)) {
    m.alpha_mean = d->value.alpha;
    m.beta_mean = d->value.beta;
  } else if (auto* p = std::get_if<HearingParamsMessage>(&params)) {
    m.alpha_mean = p->alpha.mean();
    m.alpha_variance = p->alpha.variance();
    m.beta_mean = p->beta.mean();
    m.beta_variance = p->beta.variance();
  } else {
    throw UnsupportedRule("observation node cannot read parameters from " + describe(params));
  }
  m.inv_variance_mean = expected_precision(belief(g, n.ports[3]), NoiseParam::variance);
  return m;
}

inline Message equality_rule(const Graph& g, const Node& n, std::size_t out) {
  std::optional<Message> acc;
  std::optional<Message> inputs[2];
  std::size_t k = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i == out) continue;
    inputs[k++] = g.incoming(n.id, n.ports[i]);
  }
  // delta(x - c) f(x) is the same point mass whatever f is
  for (const auto& in : inputs)
    if (in && is_point(*in)) return *in;
  const Message& a = require(inputs[0], g, n.ports[out == 0 ? 1 : 0], "incoming message");
  const Message& b = require(inputs[1], g, n.ports[out == 2 ? 1 : 2], "incoming message");
  return multiply(a, b);
}

inline Message addition_rule(const Graph& g, const Node& n, std::size_t out) {
  std::optional<Message> slot[3];
  for (std::size_t i = 0; i < 3; ++i)
    if (i != out) slot[i] = g.incoming(n.id, n.ports[i]);
  auto in = [&](std::size_t i) -> const Message& {
    return require(slot[i], g, n.ports[i], "incoming message");
  };
  switch (out) {
    case 2: return sum(in(0), in(1));
    case 0: return difference(in(2), in(1));
    default: return difference(in(2), in(0));
  }
}

inline Message gaussian_noise_rule(const Graph& g, const Node& n, std::size_t out, Rule rule) {
  if (rule == Rule::sum_product) {
    if (out == 2) {
      auto o = g.incoming(n.id, n.ports[0]);
      auto m = g.incoming(n.id, n.ports[1]);
      auto od = o ? std::get_if<DeltaMessage>(&*o) : nullptr;
      auto md = m ? std::get_if<DeltaMessage>(&*m) : nullptr;
      if (!od || !md)
        throw UnsupportedRule("sum-product toward a noise parameter needs both ends observed");
      const double d = od->point() - md->point();
      return noise_param_message(n.noise, d * d);
    }
    auto param = g.incoming(n.id, n.ports[2]);
    const double var = noise_variance(require(param, g, n.ports[2], "noise parameter"), n.noise);
    auto other = g.incoming(n.id, n.ports[out == 0 ? 1 : 0]);
    const Message& src = require(other, g, n.ports[out == 0 ? 1 : 0], "incoming message");
    if (is_flat(src)) return GaussianMessage::vague();
    if (var <= 0.0) return src;
    return sum(src, GaussianMessage(0.0, var));
  }
  if (out == 2) {
    const Moments o = moments(belief(g, n.ports[0]));
    const Moments m = moments(belief(g, n.ports[1]));
    const double d = o.mean - m.mean;
    return noise_param_message(n.noise, d * d + o.variance + m.variance);
  }
  const double tau = expected_precision(belief(g, n.ports[2]), n.noise);
  const Moments src = moments(belief(g, n.ports[out == 0 ? 1 : 0]));
  return GaussianMessage(src.mean, 1.0 / tau);
}

inline Message zurek_rule(const Graph& g, const Node& n, std::size_t out, Rule rule) {
  if (rule == Rule::variational)
    throw UnsupportedRule("bare loudness-curve node has no variational rule; use an observation node");
  if (out == 2) throw UnsupportedRule("no sum-product rule toward loudness-curve parameters");
  auto p = g.incoming(n.id, n.ports[2]);
  auto params = std::get_if<HearingParamsDelta>(&require(p, g, n.ports[2], "parameters"));
  if (!params) throw UnsupportedRule("sum-product through the loudness curve needs clamped parameters");
  if (out == 1) {
    auto in = g.incoming(n.id, n.ports[0]);
    const Message& x = require(in, g, n.ports[0], "incoming message");
    if (auto* d = std::get_if<DeltaMessage>(&x)) return DeltaMessage(zurek_L(d->point(), params->value));
    if (auto* gx = std::get_if<GaussianMessage>(&x); gx && !gx->is_vague()) {
      // first-order propagation with the local slope of the curve
      const double m = gx->mean();
      const double y = zurek_L(m, params->value);
      const Thresholds t = thresholds(params->value);
      const double slope = m < t.hearing ? 0.0 : (m < t.recruitment ? params->value.alpha : 1.0);
      if (slope == 0.0) return DeltaMessage(y);
      return GaussianMessage(y, slope * slope * gx->variance());
    }
    throw UnsupportedRule("loudness-curve forward rule has no case for " + describe(x));
  }
  // Backward: the exact message is l(x) = integral N(y | ..) delta(y - L(x)) dy,
  // i.e. the incoming Gaussian evaluated at L(x). It stays symbolic as a
  // ZurekLikelihood until it meets a Gaussian (see multiply()).
  auto o = g.incoming(n.id, n.ports[1]);
  const Message& y = require(o, g, n.ports[1], "incoming message");
  auto gy = std::get_if<GaussianMessage>(&y);
  if (!gy || gy->is_vague())
    throw UnsupportedRule("loudness-curve backward rule needs a proper Gaussian on its output");
  return ZurekLikelihood{gy->mean(), gy->variance(), params->value, 0.0};
}

inline Message observation_rule(const Graph& g, const Node& n, std::size_t out, Rule rule) {
  if (rule == Rule::sum_product) {
    auto p = g.incoming(n.id, n.ports[2]);
    auto v = g.incoming(n.id, n.ports[3]);
    auto params = std::get_if<HearingParamsDelta>(&require(p, g, n.ports[2], "parameters"));
    auto var = std::get_if<DeltaMessage>(&require(v, g, n.ports[3], "observation variance"));
    if (!params || !var || out >= 2)
      throw UnsupportedRule("sum-product through the observation node needs clamped parameters");
    if (out == 0) {
      auto s = g.incoming(n.id, n.ports[1]);
      auto sd = std::get_if<DeltaMessage>(&require(s, g, n.ports[1], "observed level"));
      if (!sd) throw UnsupportedRule("observation backward rule needs the level clamped");
      return ZurekLikelihood{sd->point(), var->point(), params->value, 0.0};
    }
    auto x = g.incoming(n.id, n.ports[0]);
    auto xd = std::get_if<DeltaMessage>(&require(x, g, n.ports[0], "received level"));
    if (!xd) throw UnsupportedRule("observation forward rule needs a clamped received level");
    return GaussianMessage(zurek_L(xd->point(), params->value), var->point());
  }
  const ObservationMoments m = observation_moments(g, n);
  switch (out) {
    case 0: return observation_input_message(m);
    case 1: return observation_output_message(m);
    case 2: {
      auto msgs = observation_slope_offset_messages(m);
      return HearingParamsMessage{msgs.alpha, msgs.beta};
    }
    default: return observation_variance_message(m);
  }
}

}  // namespace detail

/// Outgoing message of `node` on `out_edge` under the given update rule.
inline Message compute_message(const Graph& g, NodeId node, EdgeId out_edge, Rule rule) {
  const Node& n = g.node(node);
  const std::size_t out = g.port_of(node, out_edge);
  switch (n.kind) {
    case NodeKind::clamp:
    case NodeKind::prior:
      return *n.value;
    case NodeKind::equality:
      // identical under both rules: equality constraints pass beliefs through
      return detail::equality_rule(g, n, out);
    case NodeKind::addition:
      return detail::addition_rule(g, n, out);
    case NodeKind::gaussian_noise:
      return detail::gaussian_noise_rule(g, n, out, rule);
    case NodeKind::zurek:
      return detail::zurek_rule(g, n, out, rule);
    case NodeKind::observation:
      return detail::observation_rule(g, n, out, rule);
  }
  throw UnsupportedRule("unknown node kind");
}

}  // namespace hlc::ffg
