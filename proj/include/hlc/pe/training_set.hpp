#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlc/error.hpp"

namespace hlc {

struct SegmentMeta {
  long long trial_id = 0;
  std::string timestamp;
};

/// One preferred stretch of input levels and the gains that were applied.
struct Segment {
  std::vector<double> s;  // dB
  std::vector<double> g;  // dB
  SegmentMeta meta;

  void validate() const {
    if (s.size() != g.size())
      throw ArgumentError("segment: " + std::to_string(s.size()) + " levels but " +
                          std::to_string(g.size()) + " gains");
    if (s.size() < 2) throw ArgumentError("segment: needs at least two frames");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!std::isfinite(s[i]) || !std::isfinite(g[i]))
        throw ArgumentError("segment: non-finite value at frame " + std::to_string(i));
  }
};

struct TrainingSet {
  std::vector<Segment> segments;

  bool empty() const { return frames() == 0; }
  std::size_t frames() const {
    std::size_t n = 0;
    for (const auto& seg : segments) n += seg.s.size();
    return n;
  }
  void add(Segment seg) {
    seg.validate();
    segments.push_back(std::move(seg));
  }
};

inline nlohmann::json to_json(const Segment& seg) {
  return {{"s", seg.s}, {"g", seg.g},
          {"meta", {{"trial_id", seg.meta.trial_id}, {"timestamp", seg.meta.timestamp}}}};
}

inline Segment segment_from_json(const nlohmann::json& j) {
  Segment seg;
  try {
    seg.s = j.at("s").get<std::vector<double>>();
    seg.g = j.at("g").get<std::vector<double>>();
    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      seg.meta.trial_id = m.value("trial_id", 0LL);
      seg.meta.timestamp = m.value("timestamp", std::string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("segment: ") + e.what());
  }
  seg.validate();
  return seg;
}

// JSON Lines, one segment per line. Blank lines are skipped.
inline TrainingSet read_training_set(std::istream& in, const std::string& origin = "<stream>") {
  TrainingSet ts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      ts.segments.push_back(segment_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ts;
}

inline TrainingSet read_training_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open training set " + path);
  return read_training_set(in, path);
}

inline void write_segment(std::ostream& out, const Segment& seg) { out << to_json(seg).dump() << '\n'; }

inline void write_training_set(std::ostream& out, const TrainingSet& ts) {
  for (const auto& seg : ts.segments) write_segment(out, seg);
}

inline void write_training_set(const std::string& path, const TrainingSet& ts) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write training set " + path);
  write_training_set(out, ts);
}

}  // namespace hlc
