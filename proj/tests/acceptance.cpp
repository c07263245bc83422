// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "hlc/audio/frames.hpp"
#include "hlc/ffg/schedule.hpp"
#include "hlc/hada/agent.hpp"
#include "hlc/mc/bayes_factor.hpp"
#include "hlc/model/oracle.hpp"
#include "hlc/sp/characterize.hpp"
#include "hlc/sp/message_filter.hpp"
#include "support/quadrature.hpp"

using namespace hlc;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  if (!ok) ++failures;
}

void check(const char* name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(name, ok, detail);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string f(const char* fmt, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

}  // namespace

int main() {
  const Theta reference;  // alpha 2, beta -90, vartheta 10, gamma 1

  check("compression-ratio", [&](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = characterize(reference, 55.0, 80.0);
    const double secs = seconds_since(t0);
    d = f("CR = %.9f in %.4f s", c.compression_ratio, secs);
    return std::abs(c.compression_ratio - 2.0) <= 1e-6 && secs < 1.0;
  });

  check("steady-gains", [&](std::string& d) {
    const double g80 = steady_state(80.0, reference).mean, g55 = steady_state(55.0, reference).mean;
    d = f("g(80) = %.6f dB, g(55) = %.6f dB", g80, g55);
    return std::abs(g80 - 5.0) <= 0.01 && std::abs(g55 - 17.5) <= 0.01;
  });

  check("schedule-kalman-equivalence", [&](std::string& d) {
    Rng rng(99);
    double worst = 0.0;
    Theta t;
    GainState kf{0.0, 1e4}, mp{0.0, 1e4};
    for (int i = 0; i < 10000; ++i) {
      if (i % 100 == 0) {
        t.hearing = {1.2 + 2.8 * rng.uniform(), -150.0 + 120.0 * rng.uniform()};
        t.obs_variance = 0.5 + 30.0 * rng.uniform();
        t.gain_precision = 0.05 + 5.0 * rng.uniform();
        kf = mp = {-20.0 + 60.0 * rng.uniform(), 0.1 + 50.0 * rng.uniform()};
      }
      const double s = 10.0 + 100.0 * rng.uniform();
      kf = kalman_step(kf, s, t);
      mp = sp_message_step(mp, s, t);
      worst = std::max({worst, std::abs(kf.mean - mp.mean), std::abs(kf.variance - mp.variance)});
    }
    d = f("max |difference| over 10000 steps = %.3g", worst);
    return worst <= 1e-9;
  });

  check("attack-release", [&](std::string& d) {
    // independent oracle: plain recursion written out here
    auto step = [&](double& m, double& v, double s) {
      const double a = s < 90.0 ? 2.0 : 1.0;
      const double vu = 1.0 + v, k = a * vu / (10.0 + a * a * vu);
      const double x = s + m;
      const double l = 2.0 * x - 90.0 < 0.0 ? 0.0 : std::min(2.0 * x - 90.0, x);
      m += k * (s - l);
      v = (1.0 - k * a) * vu;
    };
    auto settle = [&](double m, double v, double s, double target) {
      int last = std::abs(m - target) > 2.0 ? 0 : -1;
      for (int k = 1; k < 1000; ++k) {
        step(m, v, s);
        if (std::abs(m - target) > 2.0) last = k;
      }
      return last + 1;
    };
    const auto lo = steady_state(55.0, reference), hi = steady_state(80.0, reference);
    const int attack = settle(lo.mean, lo.variance, 80.0, hi.mean);
    const int release = settle(hi.mean, hi.variance, 55.0, lo.mean);
    const auto c = characterize(reference, 55.0, 80.0);
    const double hop_ms = FrameConfig{}.hop_ms();
    d = f("attack %g steps (%g ms), release %g steps (%g ms)", c.attack_steps, c.attack_steps * hop_ms,
          c.release_steps, c.release_steps * hop_ms);
    return c.attack_steps == attack && c.release_steps == release && c.attack_steps * hop_ms <= 50.0 &&
           c.release_steps * hop_ms <= 50.0;
  });

  check("pe-recovery", [&](std::string& d) {
    const ThetaPriors priors;
    OracleDataConfig oc;
    oc.steps = 2000;
    oc.noise_sd = 3.0;
    const TrainingSet data = generate_oracle_data({2.0, -90.0}, oc);
    const auto t0 = std::chrono::steady_clock::now();
    const PosteriorSet q = estimate(data, priors);
    const double secs = seconds_since(t0);
    d = f("alpha %.4f, beta %.3f, %.2f s", q.alpha.mean(), q.beta.mean(), secs);
    const bool var_ok = q.alpha.variance() < priors.alpha.variance() && q.beta.variance() < priors.beta.variance() &&
                        q.obs_variance.variance() < priors.obs_variance.variance() &&
                        q.gain_precision.variance() < priors.gain_precision.variance();
    return std::abs(q.alpha.mean() - 2.0) <= 0.3 && std::abs(q.beta.mean() + 90.0) <= 15.0 && var_ok &&
           secs < 30.0 && q.sweeps == 200;
  });

  check("pe-empty", [&](std::string& d) {
    const ThetaPriors p;
    const PosteriorSet q = estimate(TrainingSet{}, p);
    d = "posterior equals priors";
    return q.alpha.mean() == p.alpha.mean() && q.alpha.variance() == p.alpha.variance() &&
           q.beta.mean() == p.beta.mean() && q.beta.variance() == p.beta.variance() &&
           q.obs_variance.shape() == p.obs_variance.shape() && q.obs_variance.scale() == p.obs_variance.scale() &&
           q.gain_precision.shape() == p.gain_precision.shape() && q.gain_precision.rate() == p.gain_precision.rate();
  });

  check("mc-sign", [&](std::string& d) {
    const TrainingSet constrained = generate_constrained_data(reference);
    const TrainingSet unconstrained = generate_unconstrained_data(reference.hearing);
    const double c = compare_models(constrained, ThetaPriors{}).deci_hartley;
    const double u = compare_models(unconstrained, ThetaPriors{}).deci_hartley;
    double worst = 0.0;
    for (double a : {0.5, 1.0, 2.0, 10.0, 110.0})
      for (double x : {0.1, 0.25, 1.0, 5.0, 20.0, 50.0}) {
        const double q = test::gamma_mass_by_quadrature(a, x);
        worst = std::max(worst, std::abs(gamma_cdf(GammaMessage(a, 1.0), x) - q) / std::max(q, 1e-300));
      }
    d = f("constrained %.2f dHart, unconstrained %.2f dHart, CDF rel err %.2g", c, u, worst);
    return c < 0.0 && u > c && worst <= 1e-8;
  });

  check("ffg-core", [&](std::string& d) {
    using namespace ffg;
    Graph g;
    EdgeId x1 = g.add_edge("x1"), x2 = g.add_edge("x2"), x3 = g.add_edge("x3"), x4 = g.add_edge("x4"),
           x5 = g.add_edge("x5"), va = g.add_edge("va"), vc = g.add_edge("vc");
    NodeId p1 = g.add_prior(x1, GaussianMessage(1, 2));
    NodeId cva = g.add_clamp(va, DeltaMessage(0.5));
    NodeId na = g.add_gaussian_noise(x2, x1, va, NoiseParam::variance);
    NodeId p3 = g.add_prior(x3, GaussianMessage(0.5, 3));
    NodeId add = g.add_addition(x2, x3, x5);
    NodeId nc = g.add_gaussian_noise(x5, x4, vc, NoiseParam::variance);
    NodeId p4 = g.add_prior(x4, GaussianMessage(-1, 1));
    NodeId cvc = g.add_clamp(vc, DeltaMessage(1.5));
    Schedule s;
    s.add(p1, x1).add(cva, va).add(na, x2).add(p3, x3).add(add, x5).add(p4, x4).add(cvc, vc).add(nc, x5);
    execute_schedule(g, s);
    const auto m = std::get<GaussianMessage>(*g.edge(x5).marginal);
    auto w = [](const double* x) {
      return test::normal_pdf(x[0], 1, 2) * test::normal_pdf(x[1], x[0], 0.5) * test::normal_pdf(x[2], 0.5, 3) *
             test::normal_pdf(x[3], -1, 1) * test::normal_pdf(x[1] + x[2], x[3], 1.5);
    };
    const double lo[4] = {-11, -11, -12, -9}, hi[4] = {13, 13, 13, 7};
    const auto q = test::grid4(w, [](const double* x) { return x[1] + x[2]; }, lo, hi, 49);
    const double qm = q.m1 / q.z, qv = q.m2 / q.z - qm * qm;

    // node rules against their analytic forms
    Graph e;
    EdgeId a = e.add_edge("a"), b = e.add_edge("b"), c = e.add_edge("c");
    e.add_prior(a, GaussianMessage(1, 2));
    e.add_prior(b, GaussianMessage(3, 4));
    NodeId eq = e.add_equality(a, b, c);
    execute_schedule(e, Schedule{}.add(eq, c));
    const auto pe = std::get<GaussianMessage>(*e.outgoing(eq, c));
    Graph h;
    EdgeId u = h.add_edge("u"), v = h.add_edge("v"), z = h.add_edge("z");
    h.add_prior(u, GaussianMessage(1, 2));
    h.add_prior(v, GaussianMessage(3, 4));
    NodeId sum = h.add_addition(u, v, z);
    execute_schedule(h, Schedule{}.add(sum, z));
    const auto ps = std::get<GaussianMessage>(*h.outgoing(sum, z));
    const double eq_var = 1.0 / (1.0 / 2 + 1.0 / 4), eq_mean = eq_var * (1.0 / 2 + 3.0 / 4);
    const bool rules = std::abs(pe.variance() - eq_var) < 1e-15 && std::abs(pe.mean() - eq_mean) < 1e-15 &&
                       ps.mean() == 4.0 && ps.variance() == 6.0;
    d = f("x5 marginal N(%.9f, %.9f) vs quadrature N(%.9f, %.9f)", m.mean(), m.variance(), qm, qv);
    return std::abs(m.mean() - qm) <= 1e-6 && std::abs(m.variance() - qv) <= 1e-6 && rules;
  });

  check("hada-determinism", [&](std::string& d) {
    AgentConfig cfg;
    cfg.seed = 2024;
    cfg.pe.iterations = 20;
    cfg.window_seconds = 1.0;
    cfg.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
    const std::vector<Polarity> script{Polarity::negative, Polarity::negative, Polarity::positive,
                                       Polarity::negative, Polarity::positive, Polarity::positive,
                                       Polarity::negative};
    std::vector<AppraisalRecord> log;
    for (Polarity p : script) log.push_back({0, p, "2026-01-01T00:00:00Z"});
    std::vector<double> levels;
    for (int k = 0; k < 400; ++k) levels.push_back((k / 50) % 2 ? 80.0 : 55.0);
    const auto a = replay(cfg, log, levels), b = replay(cfg, log, levels);

    Agent agent(cfg);
    std::size_t positives = 0;
    for (Polarity p : script) {
      agent.listen(levels);
      agent.on_appraisal({p, {}});
      positives += p == Polarity::positive;
    }
    const std::size_t db = agent.snapshot().db_size;
    d = f("%g trials, identical replay %g, db size %g for %g positives", static_cast<double>(a.size()),
          a == b ? 1.0 : 0.0, static_cast<double>(db), static_cast<double>(positives));
    return a == b && a.size() == 5 && db == positives;
  });

  check("audio-identity", [&](std::string& d) {
    const FrameConfig cfg;
    Rng rng(1);
    std::vector<double> x(4321);
    for (double& v : x) v = 0.9 * rng.uniform() - 0.45;  // doubled stays below full scale
    const std::size_t frames = cfg.frame_count(x.size());
    const auto same = apply_gain(x, std::vector<double>(frames, 0.0), cfg);
    const auto twice = apply_gain(x, std::vector<double>(frames, 20.0 * std::log10(2.0)), cfg);
    double e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      e0 = std::max(e0, std::abs(same.samples[i] - x[i]));
      e1 = std::max(e1, std::abs(twice.samples[i] - 2.0 * x[i]));
    }
    d = f("zero gain max err %.3g, +6.02 dB max err vs 2x %.3g", e0, e1);
    return e0 <= 1e-12 && e1 <= 1e-12;
  });

  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
