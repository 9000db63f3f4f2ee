#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uds/harness.hpp"
#include "uds/scoring.hpp"
#include "uds/search.hpp"

namespace uds {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// FNV-1a over the raw bytes of a file.
inline std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

// Parameter echo embedded in every report. Wall-clock time is only included
// when requested so that identical invocations give identical files.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_checksums;
  std::optional<double> wall_clock_seconds;
};

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = kVersion;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = m.seed;
  j["parameters"] = m.parameters;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& [path, sum] : m.input_checksums) inputs.push_back({{"path", path}, {"fnv1a64", sum}});
  j["inputs"] = inputs;
  if (m.wall_clock_seconds) j["wall_clock_seconds"] = *m.wall_clock_seconds;
  return j;
}

inline nlohmann::ordered_json to_json(const ScoreResult& r, const Dataset& data) {
  nlohmann::ordered_json j;
  j["score"] = r.score;
  auto names = nlohmann::ordered_json::array();
  for (auto c : r.permutation) names.push_back(data.name(c));
  j["permutation"] = names;
  j["numerator"] = r.numerator;
  j["denominator"] = r.denominator;
  auto ce = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < r.permutation.size(); ++i) ce[data.name(r.permutation[i])] = r.ce[i];
  j["ce"] = ce;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"target", data.name(s.target)},
                     {"discretized", data.name(s.discretized)},
                     {"h", s.h},
                     {"conditional_h", s.conditional},
                     {"bins", s.bins},
                     {"initial_bins", s.initial_bins},
                     {"capped", s.capped}});
  }
  j["steps"] = steps;
  auto bins = nlohmann::ordered_json::object();
  for (const auto& s : r.steps) bins[data.name(s.discretized)] = s.bins;
  j["bins"] = bins;
  return j;
}

inline std::string join_names(const Dataset& data, const std::vector<std::size_t>& dims, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += sep;
    out += data.name(dims[i]);
  }
  return out;
}

inline nlohmann::ordered_json to_json(const std::vector<SubspaceScore>& ranked, const Dataset& data) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    auto names = nlohmann::ordered_json::array();
    for (auto d : ranked[i].dims) names.push_back(data.name(d));
    arr.push_back({{"rank", i + 1}, {"dims", names}, {"dimensionality", ranked[i].dims.size()},
                   {"score", ranked[i].score}});
  }
  return arr;
}

inline void write_search_tsv(std::ostream& out, const std::vector<SubspaceScore>& ranked, const Dataset& data) {
  out << "rank\tdims\tdimensionality\tscore\n";
  for (std::size_t i = 0; i < ranked.size(); ++i)
    out << i + 1 << '\t' << join_names(data, ranked[i].dims) << '\t' << ranked[i].dims.size() << '\t'
        << nlohmann::json(ranked[i].score).dump() << '\n';
}

inline const char* layout_name(Layout l) {
  switch (l) {
    case Layout::equal: return "equal";
    case Layout::null_extra: return "null_extra";
    case Layout::alt_extra: return "alt_extra";
    case Layout::mixed: return "mixed";
  }
  return "?";
}

inline nlohmann::ordered_json to_json(const PowerConfig& c) {
  nlohmann::ordered_json j;
  j["f"] = response_name(c.gen.f);
  j["m"] = c.gen.m;
  j["n"] = c.gen.n;
  j["sigma_rel"] = c.gen.sigma_rel;
  j["extra"] = c.gen.extra;
  j["layout"] = layout_name(c.layout);
  if (c.layout == Layout::mixed) j["dim_range"] = {c.min_dim, c.max_dim};
  j["alpha"] = c.alpha;
  j["runs"] = c.runs;
  j["null_vs_null"] = c.null_vs_null;
  j["seed"] = c.gen.seed;
  return j;
}

// Timings are excluded unless asked for; see RunManifest.
inline nlohmann::ordered_json to_json(const PowerReport& r, bool timings) {
  nlohmann::ordered_json j;
  j["config"] = to_json(r.config);
  j["cutoff"] = r.cutoff;
  j["cutoff_rank"] = cutoff_rank(r.config.alpha, r.config.runs);
  j["power"] = r.power;
  j["null_scores"] = r.null_scores;
  j["alt_scores"] = r.alt_scores;
  j["null_dims"] = r.null_dims;
  j["alt_dims"] = r.alt_dims;
  if (timings) j["seconds"] = {{"null", r.null_seconds}, {"alt", r.alt_seconds}};
  return j;
}

// One row per run: arm, run index, dimensionality, score. A leading column
// carries beta for sensitivity sweeps.
inline void write_power_tsv_rows(std::ostream& out, const PowerReport& r, const std::string& prefix = {}) {
  auto row = [&](const char* arm, std::size_t run, std::size_t dims, double score) {
    out << prefix << arm << '\t' << run << '\t' << dims << '\t' << nlohmann::json(score).dump() << '\n';
  };
  for (std::size_t i = 0; i < r.null_scores.size(); ++i) row("null", i, r.null_dims[i], r.null_scores[i]);
  for (std::size_t i = 0; i < r.alt_scores.size(); ++i) row("alt", i, r.alt_dims[i], r.alt_scores[i]);
}

inline void write_power_tsv(std::ostream& out, const PowerReport& r) {
  out << "arm\trun\tdims\tscore\n";
  write_power_tsv_rows(out, r);
}

inline void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "m\tn\tseconds\n";
  for (const auto& r : rows) out << r.m << '\t' << r.n << '\t' << r.seconds << '\n';
}

}  // namespace uds
