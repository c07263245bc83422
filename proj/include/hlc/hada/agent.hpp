#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlc/dist/sampling.hpp"
#include "hlc/pe/estimate.hpp"
#include "hlc/sp/kalman.hpp"

namespace hlc {

enum class Polarity { positive, negative };
enum class TrialSource { initial, sampled, manual };

inline const char* to_string(Polarity p) { return p == Polarity::positive ? "pos" : "neg"; }
inline const char* to_string(TrialSource s) {
  switch (s) {
    case TrialSource::initial: return "initial";
    case TrialSource::sampled: return "sampled";
    case TrialSource::manual: return "manual";
  }
  return "?";
}

inline Polarity parse_polarity(const std::string& s) {
  if (s == "pos") return Polarity::positive;
  if (s == "neg") return Polarity::negative;
  throw ArgumentError("polarity must be \"pos\" or \"neg\", got \"" + s + "\"");
}

struct TrialState {
  long long trial_id = 1;
  Theta current_theta;
  std::string started_at;
  TrialSource source = TrialSource::initial;
};

struct Appraisal {
  Polarity polarity = Polarity::negative;
  std::string received_at;
};

struct AppraisalRecord {
  long long trial_id = 0;
  Polarity polarity = Polarity::negative;
  std::string t;
};

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// One independent draw per factor of the mean-field posterior.
inline Theta thompson_sample(const PosteriorSet& q, Rng& rng) {
  Theta t;
  t.hearing.alpha = sample(q.alpha, rng);
  t.hearing.beta = sample(q.beta, rng);
  t.obs_variance = sample(q.obs_variance, rng);
  t.gain_precision = sample(q.gain_precision, rng);
  return t;
}

inline Theta thompson_sample(const PosteriorSet& q, std::uint64_t seed) {
  Rng rng(seed);
  return thompson_sample(q, rng);
}

/// Append-only store of preferred segments, mirrored to a JSON Lines file
/// when a path is given.
class PreferenceDB {
 public:
  PreferenceDB() = default;
  explicit PreferenceDB(std::string path, bool load_existing = true) : path_(std::move(path)) {
    if (load_existing) {
      std::ifstream in(path_);
      if (in) data_ = read_training_set(in, path_);
    }
  }

  void append(Segment seg) {
    seg.validate();
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::app);
      if (!out) throw FormatError("cannot append to preference db " + path_);
      write_segment(out, seg);
    }
    data_.segments.push_back(std::move(seg));
  }

  std::size_t size() const { return data_.segments.size(); }
  const TrainingSet& data() const { return data_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  TrainingSet data_;
};

inline nlohmann::json to_json(const AppraisalRecord& r) {
  return {{"trial_id", r.trial_id}, {"polarity", to_string(r.polarity)}, {"t", r.t}};
}

inline AppraisalRecord appraisal_from_json(const nlohmann::json& j) {
  try {
    return {j.at("trial_id").get<long long>(), parse_polarity(j.at("polarity").get<std::string>()),
            j.value("t", std::string())};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("appraisal record: ") + e.what());
  }
}

inline std::vector<AppraisalRecord> read_appraisal_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open appraisal log " + path);
  std::vector<AppraisalRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      out.push_back(appraisal_from_json(nlohmann::json::parse(line)));
  return out;
}

struct AgentConfig {
  ThetaPriors priors;
  PEConfig pe;
  std::uint64_t seed = 1;
  double window_seconds = 3.0;
  double frame_rate = 200.0;  // frames per second (16 kHz / 80-sample hop)
  std::string db_path;        // empty: in memory only
  std::string log_path;       // empty: in memory only
  std::function<std::string()> clock = utc_now;

  std::size_t window_frames() const {
    const double n = window_seconds * frame_rate;
    return n < 2.0 ? 2 : static_cast<std::size_t>(n + 0.5);
  }
};

struct AppraisalOutcome {
  TrialState trial;
  bool db_appended = false;
  bool new_trial = false;
  std::vector<std::string> warnings;
};

// An appraisal arrived while the previous one is still being processed.
class AgentBusy : public Error {
 public:
  AgentBusy() : Error("an appraisal is already being processed") {}
};

/// Hearing aid design agent: negative appraisals draw a new setting from
/// the posterior, positive ones store the recent input/gain frames and
/// refresh the posterior.
///
/// Mutations go through a single writer (try-locked; a second concurrent
/// writer gets AgentBusy). Readers take consistent snapshots at any time.
class Agent {
 public:
  struct Snapshot {
    TrialState trial;
    PosteriorSet posterior;
    ThetaPriors priors;
    std::size_t db_size = 0;
    std::vector<TrialState> trials;
    std::vector<AppraisalRecord> appraisals;
  };

  explicit Agent(AgentConfig cfg)
      : cfg_(std::move(cfg)),
        rng_(cfg_.seed),
        db_(cfg_.db_path.empty() ? PreferenceDB() : PreferenceDB(cfg_.db_path)),
        posterior_(PosteriorSet::from_priors(cfg_.priors)) {
    trial_.trial_id = 1;
    trial_.current_theta = point_estimate(posterior_);
    trial_.started_at = cfg_.clock();
    trial_.source = TrialSource::initial;
    trials_.push_back(trial_);
    if (!db_.data().empty()) refresh_posterior(nullptr);
  }

  /// Records one frame the listener heard: input level and applied gain.
  void observe(double s, double g) {
    std::lock_guard lk(state_mu_);
    buffer_.push_back({s, g});
    while (buffer_.size() > cfg_.window_frames()) buffer_.pop_front();
  }

  /// Runs the current setting over a level track and records the frames.
  void listen(std::span<const double> levels) {
    const Theta theta = snapshot().trial.current_theta;
    GainState g{0.0, 1e4};
    for (double s : levels) {
      g = kalman_step(g, s, theta);
      observe(s, g.mean);
    }
  }

  AppraisalOutcome on_appraisal(const Appraisal& a) {
    std::unique_lock writer(writer_mu_, std::try_to_lock);
    if (!writer.owns_lock()) throw AgentBusy();

    AppraisalOutcome out;
    const std::string t = a.received_at.empty() ? cfg_.clock() : a.received_at;
    AppraisalRecord rec{snapshot().trial.trial_id, a.polarity, t};
    append_log(rec);

    if (a.polarity == Polarity::negative) {
      TrialState next;
      {
        std::lock_guard lk(state_mu_);
        next.trial_id = trial_.trial_id + 1;
        next.current_theta = thompson_sample(posterior_, rng_);
        next.started_at = t;
        next.source = TrialSource::sampled;
        trial_ = next;
        trials_.push_back(next);
        appraisals_.push_back(rec);
        buffer_.clear();
      }
      out.new_trial = true;
    } else {
      Segment seg;
      {
        std::lock_guard lk(state_mu_);
        appraisals_.push_back(rec);
        for (const auto& [s, g] : buffer_) {
          seg.s.push_back(s);
          seg.g.push_back(g);
        }
        seg.meta.trial_id = trial_.trial_id;
        seg.meta.timestamp = t;
      }
      if (seg.s.size() < 2) {
        out.warnings.push_back("positive appraisal with an empty buffer: nothing stored");
      } else {
        db_.append(std::move(seg));
        out.db_appended = true;
        refresh_posterior(&out.warnings);
      }
    }
    out.trial = snapshot().trial;
    return out;
  }

  /// Replaces the current setting by hand (opens a new trial).
  TrialState set_theta(const Theta& theta) {
    std::unique_lock writer(writer_mu_, std::try_to_lock);
    if (!writer.owns_lock()) throw AgentBusy();
    theta.validate();
    std::lock_guard lk(state_mu_);
    trial_ = {trial_.trial_id + 1, theta, cfg_.clock(), TrialSource::manual};
    trials_.push_back(trial_);
    buffer_.clear();
    return trial_;
  }

  Snapshot snapshot() const {
    std::lock_guard lk(state_mu_);
    return {trial_, posterior_, cfg_.priors, db_.size(), trials_, appraisals_};
  }

  std::size_t buffered_frames() const {
    std::lock_guard lk(state_mu_);
    return buffer_.size();
  }

  const AgentConfig& config() const { return cfg_; }

 private:
  void refresh_posterior(std::vector<std::string>* warnings) {
    try {
      PosteriorSet q = estimate(db_.data(), cfg_.priors, cfg_.pe);
      std::lock_guard lk(state_mu_);
      posterior_ = std::move(q);
    } catch (const Error& e) {
      if (!warnings) throw;
      warnings->push_back(std::string("posterior refresh failed, keeping previous posterior: ") + e.what());
    }
  }

  void append_log(const AppraisalRecord& rec) {
    if (cfg_.log_path.empty()) return;
    std::ofstream out(cfg_.log_path, std::ios::app);
    if (!out) throw FormatError("cannot append to appraisal log " + cfg_.log_path);
    out << to_json(rec).dump() << '\n';
  }

  AgentConfig cfg_;
  Rng rng_;
  PreferenceDB db_;
  PosteriorSet posterior_;
  TrialState trial_;
  std::vector<TrialState> trials_;
  std::vector<AppraisalRecord> appraisals_;
  std::deque<std::pair<double, double>> buffer_;
  std::mutex writer_mu_;
  mutable std::mutex state_mu_;
};

/// Replays an appraisal sequence against a fresh agent. Before each
/// appraisal the agent listens to `levels` with its current setting.
/// Returns the setting of every trial in order.
inline std::vector<Theta> replay(AgentConfig cfg, std::span<const AppraisalRecord> log,
                                 std::span<const double> levels) {
  cfg.db_path.clear();
  cfg.log_path.clear();
  Agent agent(std::move(cfg));
  for (const auto& rec : log) {
    agent.listen(levels);
    agent.on_appraisal({rec.polarity, rec.t});
  }
  std::vector<Theta> out;
  for (const auto& t : agent.snapshot().trials) out.push_back(t.current_theta);
  return out;
}

}  // namespace hlc
