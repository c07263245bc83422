#pragma once

#include <string>
#include <variant>

#include "hlc/dist/messages.hpp"
#include "hlc/error.hpp"
#include "hlc/model/zurek.hpp"

namespace hlc::ffg {

// Message from a dangling edge end: the constant function.
struct Uninformative {};

// Clamped (alpha, beta) pair.
struct HearingParamsDelta {
  HearingLossParams value;
};

// Mean-field pair of Gaussians over (alpha, beta).
struct HearingParamsMessage {
  GaussianMessage alpha = GaussianMessage::vague();
  GaussianMessage beta = GaussianMessage::vague();
};

/// Exact backward message of the loudness-curve node, as a function of the
/// edge variable v:
///
///   l(v) = N(level | L(v + shift; params), variance)
///
/// It is not Gaussian in v. It collapses to a Gaussian only when multiplied
/// with a Gaussian message: the curve is replaced by the line through
/// L(m + shift) at the prior mean m with the slope of the region selected by
/// `level` (the observed input level). See multiply().
struct ZurekLikelihood {
  double level = 0.0;
  double variance = 1.0;
  HearingLossParams params;
  double shift = 0.0;
};

using Message = std::variant<Uninformative, GaussianMessage, GammaMessage, InverseGammaMessage,
                             DeltaMessage, HearingParamsDelta, HearingParamsMessage,
                             ZurekLikelihood>;

inline std::string describe(const Message& m) {
  struct V {
    std::string operator()(const Uninformative&) const { return "uninformative"; }
    std::string operator()(const GaussianMessage& g) const {
      if (g.is_vague()) return "N(vague)";
      return "N(" + detail::fmt(g.mean()) + ", " + detail::fmt(g.variance()) + ")";
    }
    std::string operator()(const GammaMessage& g) const {
      return "Gam(" + detail::fmt(g.shape()) + ", " + detail::fmt(g.rate()) + ")";
    }
    std::string operator()(const InverseGammaMessage& g) const {
      return "Ig(" + detail::fmt(g.shape()) + ", " + detail::fmt(g.scale()) + ")";
    }
    std::string operator()(const DeltaMessage& d) const {
      return "delta(" + detail::fmt(d.point()) + ")";
    }
    std::string operator()(const HearingParamsDelta& d) const {
      return "delta(alpha=" + detail::fmt(d.value.alpha) + ", beta=" + detail::fmt(d.value.beta) +
             ")";
    }
    std::string operator()(const HearingParamsMessage& p) const {
      return "{alpha: " + (*this)(p.alpha) + ", beta: " + (*this)(p.beta) + "}";
    }
    std::string operator()(const ZurekLikelihood& z) const {
      return "L-likelihood(level=" + detail::fmt(z.level) + ", var=" + detail::fmt(z.variance) +
             ", shift=" + detail::fmt(z.shift) + ")";
    }
  };
  return std::visit(V{}, m);
}

// Raised when a node has no rule for the requested message.
class UnsupportedRule : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline Message multiply_params(const HearingParamsMessage& a, const HearingParamsMessage& b) {
  return HearingParamsMessage{gaussian_product(a.alpha, b.alpha), gaussian_product(a.beta, b.beta)};
}

// Gaussian prior times the loudness-curve likelihood. Linearizing at the
// prior mean with the observed-level slope a gives the Kalman update
//   K = a P / (v + a^2 P),  m' = m + K (level - L(m + shift)),  P' = (1 - K a) P.
inline GaussianMessage collapse(const GaussianMessage& prior, const ZurekLikelihood& z) {
  if (prior.is_vague())
    throw UnsupportedRule("loudness-curve likelihood needs a proper Gaussian to linearize at");
  const double a = active_slope(z.level, z.params);
  const double p = prior.variance();
  const double k = a * p / (z.variance + a * a * p);
  const double residual = z.level - zurek_L(prior.mean() + z.shift, z.params);
  return GaussianMessage(prior.mean() + k * residual, (1.0 - k * a) * p);
}

}  // namespace detail

/// Product of two messages on the same edge (equality-node rule and marginals).
inline Message multiply(const Message& a, const Message& b) {
  if (std::holds_alternative<Uninformative>(a)) return b;
  if (std::holds_alternative<Uninformative>(b)) return a;

  if (auto* da = std::get_if<DeltaMessage>(&a)) {
    if (auto* db = std::get_if<DeltaMessage>(&b)) {
      if (da->point() != db->point())
        throw InvalidMessage("product of point masses at different locations");
      return *da;
    }
    if (std::holds_alternative<GaussianMessage>(b) || std::holds_alternative<ZurekLikelihood>(b))
      return *da;
    if (std::holds_alternative<GammaMessage>(b) || std::holds_alternative<InverseGammaMessage>(b)) {
      if (da->point() <= 0.0) throw InvalidMessage("point mass outside positive support");
      return *da;
    }
  }
  if (std::holds_alternative<DeltaMessage>(b)) return multiply(b, a);

  if (auto* ga = std::get_if<GaussianMessage>(&a)) {
    if (auto* gb = std::get_if<GaussianMessage>(&b)) return gaussian_product(*ga, *gb);
    if (auto* zb = std::get_if<ZurekLikelihood>(&b)) return detail::collapse(*ga, *zb);
  }
  if (std::holds_alternative<ZurekLikelihood>(a) && std::holds_alternative<GaussianMessage>(b))
    return multiply(b, a);

  if (auto* ga = std::get_if<GammaMessage>(&a))
    if (auto* gb = std::get_if<GammaMessage>(&b)) return gamma_product(*ga, *gb);
  if (auto* ia = std::get_if<InverseGammaMessage>(&a))
    if (auto* ib = std::get_if<InverseGammaMessage>(&b)) return inverse_gamma_product(*ia, *ib);

  if (auto* pa = std::get_if<HearingParamsDelta>(&a)) {
    if (std::holds_alternative<HearingParamsMessage>(b)) return *pa;
    if (auto* pb = std::get_if<HearingParamsDelta>(&b)) {
      if (!(pa->value == pb->value)) throw InvalidMessage("conflicting clamped hearing parameters");
      return *pa;
    }
  }
  if (std::holds_alternative<HearingParamsDelta>(b) && std::holds_alternative<HearingParamsMessage>(a))
    return b;
  if (auto* pa = std::get_if<HearingParamsMessage>(&a))
    if (auto* pb = std::get_if<HearingParamsMessage>(&b)) return detail::multiply_params(*pa, *pb);

  throw UnsupportedRule("no product rule for " + describe(a) + " x " + describe(b));
}

// Mean and variance of a scalar belief (a point mass has variance 0).
struct Moments {
  double mean;
  double variance;
};

inline Moments moments(const Message& m) {
  if (auto* d = std::get_if<DeltaMessage>(&m)) return {d->point(), 0.0};
  if (auto* g = std::get_if<GaussianMessage>(&m)) return {g->mean(), g->variance()};
  if (auto* g = std::get_if<GammaMessage>(&m)) return {g->mean(), g->variance()};
  throw UnsupportedRule("no scalar moments for " + describe(m));
}

}  // namespace hlc::ffg
