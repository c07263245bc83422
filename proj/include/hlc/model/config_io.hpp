#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "hlc/model/theta.hpp"

// Flat `key = value` files for Theta and ThetaPriors. '#' starts a comment.
//
//   alpha = 2            alpha.mean = 1.5           obs_variance.shape = 12
//   beta = -90           alpha.variance = 0.2       obs_variance.scale = 110
//   obs_variance = 10    beta.mean = -50            gain_precision.shape = 10
//   gain_precision = 1   beta.variance = 100        gain_precision.rate = 1

namespace hlc {

using KeyValues = std::map<std::string, double>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "<stream>") {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (key.empty() || used != val.size() || val.empty())
      throw FormatError(origin + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    kv[key] = v;
  }
  return kv;
}

inline KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path);
  return parse_key_values(in, path);
}

namespace detail {

inline void take(const KeyValues& kv, const char* key, double& out) {
  if (auto it = kv.find(key); it != kv.end()) out = it->second;
}

}  // namespace detail

// Missing keys keep the values already in `base`.
inline Theta theta_from(const KeyValues& kv, Theta base = {}) {
  detail::take(kv, "alpha", base.hearing.alpha);
  detail::take(kv, "beta", base.hearing.beta);
  detail::take(kv, "obs_variance", base.obs_variance);
  detail::take(kv, "gain_precision", base.gain_precision);
  base.validate();
  return base;
}

inline ThetaPriors priors_from(const KeyValues& kv, const ThetaPriors& base = {}) {
  double am = base.alpha.mean(), av = base.alpha.variance();
  double bm = base.beta.mean(), bv = base.beta.variance();
  double vs = base.obs_variance.shape(), vc = base.obs_variance.scale();
  double gs = base.gain_precision.shape(), gr = base.gain_precision.rate();
  detail::take(kv, "alpha.mean", am);
  detail::take(kv, "alpha.variance", av);
  detail::take(kv, "beta.mean", bm);
  detail::take(kv, "beta.variance", bv);
  detail::take(kv, "obs_variance.shape", vs);
  detail::take(kv, "obs_variance.scale", vc);
  detail::take(kv, "gain_precision.shape", gs);
  detail::take(kv, "gain_precision.rate", gr);
  return {GaussianMessage(am, av), GaussianMessage(bm, bv), InverseGammaMessage(vs, vc), GammaMessage(gs, gr)};
}

inline std::string to_config(const Theta& t) {
  std::ostringstream os;
  os << "alpha = " << detail::fmt(t.hearing.alpha) << "\n"
     << "beta = " << detail::fmt(t.hearing.beta) << "\n"
     << "obs_variance = " << detail::fmt(t.obs_variance) << "\n"
     << "gain_precision = " << detail::fmt(t.gain_precision) << "\n";
  return os.str();
}

inline std::string to_config(const ThetaPriors& p) {
  std::ostringstream os;
  os << "alpha.mean = " << detail::fmt(p.alpha.mean()) << "\n"
     << "alpha.variance = " << detail::fmt(p.alpha.variance()) << "\n"
     << "beta.mean = " << detail::fmt(p.beta.mean()) << "\n"
     << "beta.variance = " << detail::fmt(p.beta.variance()) << "\n"
     << "obs_variance.shape = " << detail::fmt(p.obs_variance.shape()) << "\n"
     << "obs_variance.scale = " << detail::fmt(p.obs_variance.scale()) << "\n"
     << "gain_precision.shape = " << detail::fmt(p.gain_precision.shape()) << "\n"
     << "gain_precision.rate = " << detail::fmt(p.gain_precision.rate()) << "\n";
  return os.str();
}

}  // namespace hlc
