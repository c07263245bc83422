#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "hlc/model/observation.hpp"
#include "hlc/model/theta.hpp"
#include "hlc/pe/training_set.hpp"

namespace hlc {

/// Factorized posterior q(alpha) q(beta) q(vartheta) q(gamma).
struct PosteriorSet {
  GaussianMessage alpha{1.5, 0.2};
  GaussianMessage beta{-50.0, 100.0};
  InverseGammaMessage obs_variance{12.0, 110.0};
  GammaMessage gain_precision{10.0, 1.0};

  // diagnostics of the run that produced it
  int sweeps = 0;
  std::vector<std::string> warnings;

  static PosteriorSet from_priors(const ThetaPriors& p) {
    PosteriorSet q;
    q.alpha = p.alpha;
    q.beta = p.beta;
    q.obs_variance = p.obs_variance;
    q.gain_precision = p.gain_precision;
    return q;
  }
  ThetaPriors as_priors() const { return {alpha, beta, obs_variance, gain_precision}; }
};

struct DeltaTransition {};

// theta_k ~ N(theta_{k-1}, variance) on alpha and beta; vartheta and gamma
// keep the delta transition.
struct RandomWalkTransition {
  double variance = 1.0;
};

using ParameterTransition = std::variant<DeltaTransition, RandomWalkTransition>;

struct PEConfig {
  int iterations = 200;
  ParameterTransition transition = DeltaTransition{};
  double tolerance = 0.0;  // stop early once every posterior mean moves less; 0 disables
  ModelId model = ModelId::reference;

  void validate() const {
    if (iterations < 1) throw ArgumentError("pe: iterations must be >= 1");
    if (auto* rw = std::get_if<RandomWalkTransition>(&transition))
      if (!(rw->variance > 0.0)) throw ArgumentError("pe: random-walk variance must be positive");
    if (tolerance < 0.0) throw ArgumentError("pe: tolerance must be non-negative");
  }
};

// A sweep produced a non-finite or invalid moment.
class IterationFailure : public NumericalError {
 public:
  IterationFailure(const std::string& parameter, int sweep, const std::string& what)
      : NumericalError("pe sweep " + std::to_string(sweep) + ": " + parameter + ": " + what),
        parameter_(parameter) {}
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

/// Messages over the four parameters on one edge of the parameter chains.
struct ParamMessages {
  GaussianMessage alpha = GaussianMessage::vague();
  GaussianMessage beta = GaussianMessage::vague();
  InverseGammaMessage obs_variance = InverseGammaMessage::vague();
  GammaMessage gain_precision = GammaMessage::vague();

  static ParamMessages from_priors(const ThetaPriors& p) {
    return {p.alpha, p.beta, p.obs_variance, p.gain_precision};
  }
};

inline ParamMessages operator*(const ParamMessages& a, const ParamMessages& b) {
  return {gaussian_product(a.alpha, b.alpha), gaussian_product(a.beta, b.beta),
          inverse_gamma_product(a.obs_variance, b.obs_variance),
          gamma_product(a.gain_precision, b.gain_precision)};
}

// One time slice with its observed level, received level and gain step.
struct PESlice {
  double s = 0.0;
  double x = 0.0;     // s + g
  double step = 0.0;  // g_k - g_{k-1}
  bool has_step = false;
};

/// Forward/backward messages along the parameter equality chains.
/// fw[k] enters slice k from the left (fw[0] carries the priors), bw[k]
/// enters from the right (vague at the last slice), local[k] is the
/// variational message from slice k's observation and transition factors.
struct ChainState {
  std::vector<PESlice> slices;
  std::vector<ParamMessages> local, fw, bw;
  ThetaPriors priors;
  ModelId model = ModelId::reference;
  ParameterTransition transition = DeltaTransition{};
  int sweep = 0;

  std::size_t size() const { return slices.size(); }
  ParamMessages marginal(std::size_t k) const { return fw.at(k) * local.at(k) * bw.at(k); }
};

inline std::vector<PESlice> make_slices(const TrainingSet& data) {
  std::vector<PESlice> out;
  out.reserve(data.frames());
  for (const auto& seg : data.segments) {
    seg.validate();
    for (std::size_t i = 0; i < seg.s.size(); ++i) {
      PESlice sl;
      sl.s = seg.s[i];
      sl.x = seg.s[i] + seg.g[i];
      if (i > 0) {
        sl.step = seg.g[i] - seg.g[i - 1];
        sl.has_step = true;
      }
      out.push_back(sl);
    }
  }
  return out;
}

inline ChainState make_chain(const TrainingSet& data, const ThetaPriors& priors,
                             const PEConfig& cfg = {}) {
  ChainState c;
  c.slices = make_slices(data);
  c.priors = priors;
  c.model = cfg.model;
  c.transition = cfg.transition;
  const std::size_t n = c.slices.size();
  c.local.assign(n, ParamMessages{});
  c.fw.assign(n, ParamMessages{});
  c.bw.assign(n, ParamMessages{});
  if (n > 0) c.fw[0] = ParamMessages::from_priors(priors);
  return c;
}

namespace detail {

inline ParamMessages transition(const ParamMessages& m, const ParameterTransition& t) {
  auto* rw = std::get_if<RandomWalkTransition>(&t);
  if (!rw) return m;
  ParamMessages out = m;
  if (!m.alpha.is_vague()) out.alpha = GaussianMessage(m.alpha.mean(), m.alpha.variance() + rw->variance);
  if (!m.beta.is_vague()) out.beta = GaussianMessage(m.beta.mean(), m.beta.variance() + rw->variance);
  return out;
}

inline void check_finite(double v, const char* parameter, int sweep) {
  if (!std::isfinite(v)) throw IterationFailure(parameter, sweep, "non-finite moment");
}

inline ObservationMoments slice_moments(const PESlice& sl, const ParamMessages& belief, int sweep) {
  ObservationMoments m;
  m.s = sl.s;
  m.x_mean = sl.x;
  m.x_variance = 0.0;
  try {
    m.alpha_mean = belief.alpha.mean();
    m.alpha_variance = belief.alpha.variance();
  } catch (const Error& e) {
    throw IterationFailure("alpha", sweep, e.what());
  }
  try {
    m.beta_mean = belief.beta.mean();
    m.beta_variance = belief.beta.variance();
  } catch (const Error& e) {
    throw IterationFailure("beta", sweep, e.what());
  }
  try {
    m.inv_variance_mean = belief.obs_variance.mean_inverse();
  } catch (const Error& e) {
    throw IterationFailure("obs_variance", sweep, e.what());
  }
  check_finite(m.alpha_mean, "alpha", sweep);
  check_finite(m.alpha_variance, "alpha", sweep);
  check_finite(m.beta_mean, "beta", sweep);
  check_finite(m.beta_variance, "beta", sweep);
  check_finite(m.inv_variance_mean, "obs_variance", sweep);
  return m;
}

}  // namespace detail

/// Recomputes the local message of slice k from the current beliefs:
/// gamma first (it only sees the clamped gains), then vartheta, then
/// (alpha, beta) with the refreshed vartheta belief.
inline void update_local(ChainState& c, std::size_t k) {
  const PESlice& sl = c.slices[k];
  ParamMessages& loc = c.local[k];
  if (c.model == ModelId::reference && sl.has_step)
    loc.gain_precision = transition_precision_message(sl.step * sl.step);
  ParamMessages belief = c.marginal(k);
  loc.obs_variance = observation_variance_message(detail::slice_moments(sl, belief, c.sweep));
  belief = c.marginal(k);
  const SlopeOffsetMessages ab = observation_slope_offset_messages(detail::slice_moments(sl, belief, c.sweep));
  loc.alpha = ab.alpha;
  loc.beta = ab.beta;
}

/// Left-to-right pass: refresh each slice's local messages, then pass the
/// mixed belief through the parameter transition into the next slice.
inline void forward_pass(ChainState& c) {
  for (std::size_t k = 0; k < c.size(); ++k) {
    update_local(c, k);
    if (k + 1 < c.size()) c.fw[k + 1] = detail::transition(c.fw[k] * c.local[k], c.transition);
  }
}

/// Right-to-left pass over the equality chains using the current local messages.
inline void backward_pass(ChainState& c) {
  for (std::size_t k = c.size(); k-- > 1;)
    c.bw[k - 1] = detail::transition(c.bw[k] * c.local[k], c.transition);
}

inline PosteriorSet posterior_at(const ChainState& c, std::size_t k) {
  const ParamMessages m = c.marginal(k);
  PosteriorSet q;
  q.alpha = m.alpha;
  q.beta = m.beta;
  q.obs_variance = m.obs_variance;
  q.gain_precision = m.gain_precision;
  q.sweeps = c.sweep;
  return q;
}

namespace detail {

inline void audit(const PosteriorSet& q, int sweep) {
  if (q.alpha.is_vague()) throw IterationFailure("alpha", sweep, "posterior became improper");
  if (q.beta.is_vague()) throw IterationFailure("beta", sweep, "posterior became improper");
  if (!q.obs_variance.is_proper())
    throw IterationFailure("obs_variance", sweep, "posterior became improper");
  if (!q.gain_precision.is_proper())
    throw IterationFailure("gain_precision", sweep, "posterior became improper");
  check_finite(q.alpha.mean(), "alpha", sweep);
  check_finite(q.alpha.variance(), "alpha", sweep);
  check_finite(q.beta.mean(), "beta", sweep);
  check_finite(q.beta.variance(), "beta", sweep);
  check_finite(q.obs_variance.mean_inverse(), "obs_variance", sweep);
  check_finite(q.gain_precision.mean(), "gain_precision", sweep);
}

inline double max_mean_shift(const PosteriorSet& a, const PosteriorSet& b) {
  double d = std::max(std::abs(a.alpha.mean() - b.alpha.mean()), std::abs(a.beta.mean() - b.beta.mean()));
  d = std::max(d, std::abs(a.obs_variance.mean_inverse() - b.obs_variance.mean_inverse()));
  return std::max(d, std::abs(a.gain_precision.mean() - b.gain_precision.mean()));
}

}  // namespace detail

/// Runs cfg.iterations forward/backward sweeps and returns the parameter
/// posterior at the last slice. Under the delta transition every slice holds
/// the same posterior: the priors times all local messages.
inline PosteriorSet estimate(const TrainingSet& data, const ThetaPriors& priors, const PEConfig& cfg = {}) {
  cfg.validate();
  if (data.empty()) {
    PosteriorSet q = PosteriorSet::from_priors(priors);
    q.warnings.push_back("empty training set: returning the priors");
    return q;
  }
  ChainState c = make_chain(data, priors, cfg);
  PosteriorSet prev = PosteriorSet::from_priors(priors);
  PosteriorSet q = prev;
  for (int it = 1; it <= cfg.iterations; ++it) {
    c.sweep = it;
    forward_pass(c);
    backward_pass(c);
    q = posterior_at(c, c.size() - 1);
    detail::audit(q, it);
    if (cfg.tolerance > 0.0 && detail::max_mean_shift(q, prev) < cfg.tolerance) break;
    prev = q;
  }
  return q;
}

/// Posterior means as a runnable parameter set.
inline Theta point_estimate(const PosteriorSet& q) {
  Theta t;
  t.hearing.alpha = q.alpha.mean();
  t.hearing.beta = q.beta.mean();
  if (!(q.obs_variance.shape() > 1.0))
    throw NumericalError("point estimate: inverse-gamma mean undefined for shape <= 1");
  t.obs_variance = q.obs_variance.mean();
  t.gain_precision = q.gain_precision.mean();
  return t;
}

namespace detail {

template <class D>
void report_line(std::ostream& os, const char* name, const D& d) {
  os << name << ".mean = " << fmt(d.mean()) << "\n";
  os << name << ".variance = " << fmt(d.variance()) << "\n";
}

}  // namespace detail

/// key = value report with mean and variance per parameter.
inline void write_report(std::ostream& os, const PosteriorSet& q) {
  detail::report_line(os, "alpha", q.alpha);
  detail::report_line(os, "beta", q.beta);
  os << "obs_variance.shape = " << detail::fmt(q.obs_variance.shape()) << "\n";
  os << "obs_variance.scale = " << detail::fmt(q.obs_variance.scale()) << "\n";
  if (q.obs_variance.shape() > 1.0) os << "obs_variance.mean = " << detail::fmt(q.obs_variance.mean()) << "\n";
  if (q.obs_variance.shape() > 2.0)
    os << "obs_variance.variance = " << detail::fmt(q.obs_variance.variance()) << "\n";
  os << "gain_precision.shape = " << detail::fmt(q.gain_precision.shape()) << "\n";
  os << "gain_precision.rate = " << detail::fmt(q.gain_precision.rate()) << "\n";
  detail::report_line(os, "gain_precision", q.gain_precision);
  os << "sweeps = " << q.sweeps << "\n";
  for (const auto& w : q.warnings) os << "warning = " << w << "\n";
}

}  // namespace hlc
