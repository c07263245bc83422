// hlc: gain inference, parameter estimation, model comparison, data
// generation and the appraisal service from the command line.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hlc/audio/bands.hpp"
#include "hlc/mc/bayes_factor.hpp"
#include "hlc/model/config_io.hpp"
#include "hlc/model/oracle.hpp"
#include "hlc/service/server.hpp"
#include "hlc/sp/characterize.hpp"

namespace {

constexpr int kMissingFile = 2;

struct MissingFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (!path.empty() && !std::filesystem::exists(path))
    throw MissingFile(std::string(what) + " not found: " + path);
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = hlc::trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw hlc::ArgumentError("bad level '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw hlc::ArgumentError("--levels needs at least one value");
  return out;
}

// Output goes to the file when given, stdout otherwise.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw hlc::FormatError("cannot write " + path);
  write(out);
}

struct ThetaFlags {
  std::optional<double> alpha, beta, obs_var, gain_prec;
  std::string config;

  void add(CLI::App* app) {
    app->add_option("--alpha", alpha, "slope of the loudness curve");
    app->add_option("--beta", beta, "offset of the loudness curve (dB)");
    app->add_option("--obs-var", obs_var, "observation variance (dB^2)");
    app->add_option("--gain-prec", gain_prec, "gain transition precision (dB^-2)");
    app->add_option("--config", config, "key = value file with theta or priors");
  }

  hlc::Theta theta() const {
    require_file(config, "config file");
    hlc::Theta t;
    if (!config.empty()) t = hlc::theta_from(hlc::read_key_values(config));
    if (alpha) t.hearing.alpha = *alpha;
    if (beta) t.hearing.beta = *beta;
    if (obs_var) t.obs_variance = *obs_var;
    if (gain_prec) t.gain_precision = *gain_prec;
    t.validate();
    return t;
  }

  hlc::ThetaPriors priors() const {
    require_file(config, "config file");
    return config.empty() ? hlc::ThetaPriors{} : hlc::priors_from(hlc::read_key_values(config));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian hearing loss compensation"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  hlc::FrameConfig frames;

  // sp ---------------------------------------------------------------------
  auto* sp = app.add_subcommand("sp", "infer gains for a level sequence or a WAV file");
  ThetaFlags sp_theta;
  sp_theta.add(sp);
  std::string sp_levels = "80,55", sp_input, sp_output, sp_trace;
  int sp_steps = 200, sp_hold = 50, sp_bands = 1;
  sp->add_option("--levels", sp_levels, "comma separated input levels (dB), cycled");
  sp->add_option("--steps", sp_steps, "number of frames for the synthetic sequence")->check(CLI::PositiveNumber);
  sp->add_option("--hold", sp_hold, "frames each level is held")->check(CLI::PositiveNumber);
  sp->add_option("--input", sp_input, "input WAV");
  sp->add_option("--output", sp_output, "output WAV (with --input) or trace CSV");
  sp->add_option("--trace", sp_trace, "gain trace CSV");
  sp->add_option("--bands", sp_bands, "uniform FFT bands for WAV processing")->check(CLI::PositiveNumber);
  sp->add_option("--seed", seed, "random seed (unused by sp, accepted for uniformity)");

  // pe ---------------------------------------------------------------------
  auto* pe = app.add_subcommand("pe", "estimate parameter posteriors from a training set");
  ThetaFlags pe_priors;
  pe->add_option("--config", pe_priors.config, "key = value file with priors");
  std::string pe_data, pe_output;
  int pe_iters = 200;
  double pe_tol = 0.0;
  std::optional<double> pe_walk;
  pe->add_option("--data", pe_data, "training set (JSON Lines)")->required();
  pe->add_option("--iters", pe_iters, "variational sweeps")->check(CLI::PositiveNumber);
  pe->add_option("--tolerance", pe_tol, "early stop when posterior means move less");
  pe->add_option("--random-walk", pe_walk, "random-walk variance on alpha and beta");
  pe->add_option("--output", pe_output, "report file (stdout if omitted)");
  pe->add_option("--seed", seed, "random seed");

  // mc ---------------------------------------------------------------------
  auto* mc = app.add_subcommand("mc", "Bayes factor of the unconstrained-gain model");
  ThetaFlags mc_priors;
  mc->add_option("--config", mc_priors.config, "key = value file with priors");
  std::string mc_data, mc_output;
  int mc_iters = 200;
  double omega = 0.25;
  mc->add_option("--data", mc_data, "training set (JSON Lines)")->required();
  mc->add_option("--iters", mc_iters, "variational sweeps")->check(CLI::PositiveNumber);
  mc->add_option("--omega", omega, "upper bound of the nested set [0, omega]")->check(CLI::PositiveNumber);
  mc->add_option("--output", mc_output, "report file (stdout if omitted)");
  mc->add_option("--seed", seed, "random seed");

  // gen --------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate synthetic training data or a test tone");
  ThetaFlags gen_theta;
  gen_theta.add(gen);
  std::string gen_kind = "oracle", gen_output, gen_levels = "55,80";
  int gen_steps = 2000, gen_hold = 200;
  double gen_noise = 3.0;
  gen->add_option("--kind", gen_kind, "oracle | constrained | unconstrained | tone")
      ->check(CLI::IsMember({"oracle", "constrained", "unconstrained", "tone"}));
  gen->add_option("--steps", gen_steps, "frames")->check(CLI::PositiveNumber);
  gen->add_option("--noise", gen_noise, "observation noise sd (dB)");
  gen->add_option("--levels", gen_levels, "two levels for --kind tone");
  gen->add_option("--hold", gen_hold, "frames per level for --kind tone")->check(CLI::PositiveNumber);
  gen->add_option("--output", gen_output, "output file")->required();
  gen->add_option("--seed", seed, "random seed");

  // serve ------------------------------------------------------------------
  auto* srv = app.add_subcommand("serve", "run the appraisal service");
  hlc::ServerConfig scfg;
  ThetaFlags srv_priors;
  srv->add_option("--port", scfg.port, "TCP port")->check(CLI::Range(1, 65535));
  srv->add_option("--bind", scfg.bind, "bind address");
  srv->add_option("--input", scfg.audio_path, "demo WAV (generated tone if omitted)");
  srv->add_option("--data", scfg.db_path, "preference database (JSON Lines)");
  srv->add_option("--log", scfg.log_path, "appraisal log (JSON Lines)");
  srv->add_option("--config", srv_priors.config, "key = value file with priors");
  srv->add_option("--iters", scfg.pe.iterations, "variational sweeps per refresh")->check(CLI::PositiveNumber);
  srv->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sp->parsed()) {
      const hlc::Theta theta = sp_theta.theta();
      if (!sp_input.empty()) {
        require_file(sp_input, "input file");
        const hlc::WavData in = hlc::read_wav(sp_input);
        if (sp_bands > 1) {
          hlc::BandResult r = hlc::process_bands(in, theta, sp_bands, frames);
          if (!sp_output.empty()) hlc::write_wav(sp_output, r.output);
          std::cout << "frames = " << r.levels[0].size() << "\nbands = " << sp_bands
                    << "\nclipped = " << r.clipped << "\n";
          return 0;
        }
        hlc::ProcessResult r = hlc::process(in, theta, frames);
        if (!sp_output.empty()) hlc::write_wav(sp_output, r.output);
        if (!sp_trace.empty()) emit(sp_trace, [&](std::ostream& os) { hlc::write_trace_csv(os, r.levels, r.gains); });
        std::cout << "frames = " << r.levels.size() << "\nhop_ms = " << r.frames.hop_ms()
                  << "\nclipped = " << r.clipped << "\n";
        return 0;
      }
      const std::vector<double> pattern = parse_levels(sp_levels);
      std::vector<double> levels(static_cast<std::size_t>(sp_steps));
      for (std::size_t k = 0; k < levels.size(); ++k) levels[k] = pattern[(k / sp_hold) % pattern.size()];
      const auto gains = hlc::run_sequence(levels, theta);
      const std::string trace = sp_trace.empty() ? sp_output : sp_trace;
      if (!trace.empty()) emit(trace, [&](std::ostream& os) { hlc::write_trace_csv(os, levels, gains); });
      std::cout << "final_gain = " << gains.back().mean << "\n";
      const auto [lo, hi] = std::minmax_element(pattern.begin(), pattern.end());
      if (pattern.size() >= 2 && *lo < *hi) {
        try {
          hlc::print(std::cout, hlc::characterize(theta, *lo, *hi), frames.hop_ms());
        } catch (const hlc::CharacterizationError& e) {
          std::cerr << "warning: " << e.what() << "\n";
        }
      }
      return 0;
    }
    if (pe->parsed()) {
      require_file(pe_data, "training set");
      hlc::PEConfig cfg;
      cfg.iterations = pe_iters;
      cfg.tolerance = pe_tol;
      if (pe_walk) cfg.transition = hlc::RandomWalkTransition{*pe_walk};
      const hlc::PosteriorSet q = hlc::estimate(hlc::read_training_set(pe_data), pe_priors.priors(), cfg);
      for (const auto& w : q.warnings) std::cerr << "warning: " << w << "\n";
      emit(pe_output, [&](std::ostream& os) { hlc::write_report(os, q); });
      return 0;
    }
    if (mc->parsed()) {
      require_file(mc_data, "training set");
      hlc::PEConfig cfg;
      cfg.iterations = mc_iters;
      hlc::NestingSpec spec;
      spec.omega = omega;
      const hlc::TrainingSet data = hlc::read_training_set(mc_data);
      if (data.empty()) std::cerr << "warning: empty training set: posterior equals prior\n";
      const hlc::BFResult r = hlc::compare_models(data, mc_priors.priors(), spec, cfg);
      emit(mc_output, [&](std::ostream& os) { hlc::write_report(os, r); });
      return 0;
    }
    if (gen->parsed()) {
      const hlc::Theta theta = gen_theta.theta();
      if (gen_kind == "tone") {
        const auto lv = parse_levels(gen_levels);
        if (lv.size() != 2) throw hlc::ArgumentError("--kind tone needs exactly two --levels");
        hlc::write_wav(gen_output, hlc::alternating_tone(lv[0], lv[1], gen_hold, gen_steps, frames));
        return 0;
      }
      hlc::TrainingSet ts;
      if (gen_kind == "constrained") {
        hlc::GainWalkConfig c;
        c.steps = gen_steps;
        c.noise_sd = gen_noise;
        c.seed = seed;
        ts = hlc::generate_constrained_data(theta, c);
      } else {
        hlc::OracleDataConfig c;
        c.steps = gen_steps;
        c.noise_sd = gen_noise;
        c.seed = seed;
        ts = gen_kind == "oracle" ? hlc::generate_oracle_data(theta.hearing, c)
                                  : hlc::generate_unconstrained_data(theta.hearing, c);
      }
      hlc::write_training_set(gen_output, ts);
      return 0;
    }
    if (srv->parsed()) {
      require_file(scfg.audio_path, "input file");
      scfg.seed = seed;
      scfg.priors = srv_priors.priors();
      std::cerr << "listening on http://" << scfg.bind << ":" << scfg.port << "\n";
      hlc::serve(scfg);
      return 0;
    }
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissingFile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
