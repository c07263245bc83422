#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hlc/audio/process.hpp"
#include "hlc/hada/agent.hpp"

namespace hlc {

struct ServerConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string audio_path;  // demo WAV; empty: a generated 55/80 dB tone
  std::string db_path;
  std::string log_path;
  std::uint64_t seed = 1;
  FrameConfig frames;
  double window_seconds = 3.0;
  ThetaPriors priors;
  PEConfig pe;
  std::function<std::string()> clock = utc_now;

  void validate() const {
    if (port < 1 || port > 65535) throw ArgumentError("server: port must be in [1, 65535]");
    frames.validate();
  }
};

/// Transport-independent response.
struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

namespace detail {

inline nlohmann::json theta_json(const Theta& t) {
  return {{"alpha", t.hearing.alpha},
          {"beta", t.hearing.beta},
          {"obs_variance", t.obs_variance},
          {"gain_precision", t.gain_precision}};
}

inline nlohmann::json trial_json(const TrialState& t) {
  return {{"trial_id", t.trial_id},
          {"source", to_string(t.source)},
          {"started_at", t.started_at},
          {"theta", theta_json(t.current_theta)}};
}

template <class D>
nlohmann::json summary_json(const D& d) {
  nlohmann::json j = {{"mean", nullptr}, {"variance", nullptr}};
  try {
    j["mean"] = d.mean();
    j["variance"] = d.variance();
  } catch (const Error&) {
    // moments undefined for this shape
  }
  return j;
}

inline nlohmann::json posterior_summary(const PosteriorSet& q) {
  return {{"alpha", summary_json(q.alpha)},
          {"beta", summary_json(q.beta)},
          {"obs_variance", summary_json(q.obs_variance)},
          {"gain_precision", summary_json(q.gain_precision)}};
}

inline Response json_response(int status, const nlohmann::json& j) { return {status, "application/json", j.dump()}; }
inline Response error_response(int status, const std::string& msg) { return json_response(status, {{"error", msg}}); }

// Density of a real-line and a positive parameter over a shared grid.
template <class D>
nlohmann::json density_json(const D& post, const D& prior, double lo, double hi, bool positive, int points) {
  if (positive) lo = std::max(lo, hi * 1e-4);
  std::vector<double> grid(points), dpost(points), dprior(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * i / (points - 1);
    dpost[i] = post.pdf(grid[i]);
    dprior[i] = prior.pdf(grid[i]);
  }
  nlohmann::json j = summary_json(post);
  j["prior"] = summary_json(prior);
  j["grid"] = grid;
  j["density"] = dpost;
  j["prior_density"] = dprior;
  return j;
}

inline std::pair<double, double> span_of(const GaussianMessage& a, const GaussianMessage& b) {
  const double lo = std::min(a.mean() - 4 * std::sqrt(a.variance()), b.mean() - 4 * std::sqrt(b.variance()));
  const double hi = std::max(a.mean() + 4 * std::sqrt(a.variance()), b.mean() + 4 * std::sqrt(b.variance()));
  return {lo, hi};
}

template <class D>
double upper_of(const D& d) {
  try {
    return d.mean() + 5.0 * std::sqrt(d.variance());
  } catch (const Error&) {
    return 1.0;
  }
}

}  // namespace detail

/// The HADA loop behind JSON endpoints. Every handler is a plain member
/// function so it can be exercised without a socket; attach() binds them to
/// an httplib server.
class Service {
 public:
  static constexpr int kGridPoints = 101;

  explicit Service(ServerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    original_ = cfg_.audio_path.empty() ? alternating_tone(55.0, 80.0, 200, 1200, cfg_.frames)
                                        : read_wav(cfg_.audio_path);
    cfg_.frames.sample_rate = original_.sample_rate;
    AgentConfig ac;
    ac.priors = cfg_.priors;
    ac.pe = cfg_.pe;
    ac.seed = cfg_.seed;
    ac.window_seconds = cfg_.window_seconds;
    ac.frame_rate = cfg_.frames.frame_rate();
    ac.db_path = cfg_.db_path;
    ac.log_path = cfg_.log_path;
    ac.clock = cfg_.clock;
    agent_ = std::make_unique<Agent>(std::move(ac));
    original_wav_ = encode_wav(original_);
    render_current();
  }

  Agent& agent() { return *agent_; }
  const ServerConfig& config() const { return cfg_; }

  Response get_state() const {
    const auto s = agent_->snapshot();
    nlohmann::json j = detail::trial_json(s.trial);
    j["posterior"] = detail::posterior_summary(s.posterior);
    j["db_size"] = s.db_size;
    j["appraisal_count"] = s.appraisals.size();
    return detail::json_response(200, j);
  }

  Response post_appraisal(const std::string& body) {
    std::unique_lock writer(writer_mu_, std::try_to_lock);
    if (!writer.owns_lock()) return detail::error_response(409, "an appraisal is already being processed");
    Polarity polarity;
    try {
      const auto j = nlohmann::json::parse(body);
      if (!j.is_object() || !j.contains("polarity") || !j["polarity"].is_string())
        return detail::error_response(400, "body must be {\"polarity\": \"pos\" | \"neg\"}");
      polarity = parse_polarity(j["polarity"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      return detail::error_response(400, std::string("malformed JSON: ") + e.what());
    } catch (const ArgumentError& e) {
      return detail::error_response(400, e.what());
    }
    try {
      const AppraisalOutcome out = agent_->on_appraisal({polarity, {}});
      if (out.new_trial) render_current();
      const auto s = agent_->snapshot();
      nlohmann::json j = detail::trial_json(out.trial);
      j["new_trial"] = out.new_trial;
      j["db_appended"] = out.db_appended;
      j["db_size"] = s.db_size;
      j["warnings"] = out.warnings;
      return detail::json_response(200, j);
    } catch (const AgentBusy& e) {
      return detail::error_response(409, e.what());
    } catch (const Error& e) {
      return detail::error_response(500, e.what());
    }
  }

  Response get_audio_current() const {
    std::lock_guard lk(audio_mu_);
    return {200, "audio/wav", std::string(current_wav_->begin(), current_wav_->end())};
  }

  Response get_audio_original() const {
    return {200, "audio/wav", std::string(original_wav_.begin(), original_wav_.end())};
  }

  Response get_history() const {
    const auto s = agent_->snapshot();
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : s.trials) trials.push_back(detail::trial_json(t));
    nlohmann::json appraisals = nlohmann::json::array();
    for (const auto& a : s.appraisals) appraisals.push_back(to_json(a));
    return detail::json_response(200, {{"trials", trials}, {"appraisals", appraisals}, {"db_size", s.db_size}});
  }

  Response get_posterior() const {
    const auto s = agent_->snapshot();
    const auto& q = s.posterior;
    const auto& p = s.priors;
    nlohmann::json j;
    auto [alo, ahi] = detail::span_of(q.alpha, p.alpha);
    j["alpha"] = detail::density_json(q.alpha, p.alpha, alo, ahi, false, kGridPoints);
    auto [blo, bhi] = detail::span_of(q.beta, p.beta);
    j["beta"] = detail::density_json(q.beta, p.beta, blo, bhi, false, kGridPoints);
    j["obs_variance"] = detail::density_json(
        q.obs_variance, p.obs_variance, 0.0,
        std::max(detail::upper_of(q.obs_variance), detail::upper_of(p.obs_variance)), true, kGridPoints);
    j["gain_precision"] = detail::density_json(
        q.gain_precision, p.gain_precision, 0.0,
        std::max(detail::upper_of(q.gain_precision), detail::upper_of(p.gain_precision)), true, kGridPoints);
    j["trial_id"] = s.trial.trial_id;
    j["db_size"] = s.db_size;
    return detail::json_response(200, j);
  }

  /// Routes every endpoint on `srv`.
  void attach(httplib::Server& srv) {
    auto send = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    srv.Get("/api/state", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_state()); });
    srv.Post("/api/appraisal", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, post_appraisal(req.body));
    });
    srv.Get("/api/audio/current",
            [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_audio_current()); });
    srv.Get("/api/audio/original",
            [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_audio_original()); });
    srv.Get("/api/history", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_history()); });
    srv.Get("/api/posterior",
            [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_posterior()); });
  }

 private:
  // Processes the demo audio with the current setting, caches it per trial
  // and feeds the heard frames into the agent's buffer.
  void render_current() {
    const auto s = agent_->snapshot();
    std::shared_ptr<const std::vector<unsigned char>> wav;
    {
      std::lock_guard lk(audio_mu_);
      if (auto it = cache_.find(s.trial.trial_id); it != cache_.end()) wav = it->second;
    }
    const ProcessResult r = process(original_, s.trial.current_theta, cfg_.frames);
    for (std::size_t k = 0; k < r.levels.size(); ++k) agent_->observe(r.levels[k], r.gains[k].mean);
    if (!wav) wav = std::make_shared<const std::vector<unsigned char>>(encode_wav(r.output));
    std::lock_guard lk(audio_mu_);
    cache_[s.trial.trial_id] = wav;
    current_wav_ = wav;
  }

  ServerConfig cfg_;
  WavData original_;
  std::vector<unsigned char> original_wav_;
  std::unique_ptr<Agent> agent_;
  std::mutex writer_mu_;
  mutable std::mutex audio_mu_;
  std::map<long long, std::shared_ptr<const std::vector<unsigned char>>> cache_;
  std::shared_ptr<const std::vector<unsigned char>> current_wav_;
};

/// Blocks serving the endpoints until the server is stopped.
inline void serve(const ServerConfig& cfg) {
  Service svc(cfg);
  httplib::Server srv;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  svc.attach(srv);
  if (!srv.listen(cfg.bind, cfg.port))
    throw Error("cannot listen on " + cfg.bind + ":" + std::to_string(cfg.port));
}

}  // namespace hlc
