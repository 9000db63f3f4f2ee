#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uds/parallel.hpp"
#include "uds/scoring.hpp"

namespace uds {

struct SearchConfig {
  std::size_t beam_width = 10;
  std::size_t max_dim = 5;
  std::size_t top_k = 20;
  std::optional<double> min_score;
  ScoreConfig score;
  unsigned threads = 1;  // 0 = all cores
};

struct SubspaceScore {
  std::vector<std::size_t> dims;  // ascending
  double score = 0.0;
};

// Score descending, then dims lexicographically.
inline bool ranks_before(const SubspaceScore& a, const SubspaceScore& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.dims < b.dims;
}

// Levelwise beam search for the most dependent subspaces. Level 2 scores
// every pair; each later level extends the beam members of the previous
// level by one more column. Every scored subspace competes for the global
// top-k regardless of its size.
inline std::vector<SubspaceScore> beam_search(const Dataset& data, const SearchConfig& config) {
  const std::size_t n = data.cols();
  if (n < 2) throw std::invalid_argument("beam search needs a dataset with >= 2 columns");
  if (config.beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (config.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  if (config.max_dim < 2 || config.max_dim > n)
    throw std::invalid_argument("max_dim must lie in [2, " + std::to_string(n) + "]");

  std::map<std::vector<std::size_t>, double> cache;
  std::vector<SubspaceScore> pool;

  auto score_level = [&](std::vector<std::vector<std::size_t>> candidates) {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::vector<std::vector<std::size_t>> fresh;
    for (auto& c : candidates)
      if (!cache.count(c)) fresh.push_back(c);
    std::vector<double> scores(fresh.size());
    parallel_for(fresh.size(), config.threads,
                 [&](std::size_t i) { scores[i] = uds_pr(data, fresh[i], config.score).score; });
    for (std::size_t i = 0; i < fresh.size(); ++i) cache.emplace(fresh[i], scores[i]);

    std::vector<SubspaceScore> level;
    level.reserve(candidates.size());
    for (auto& c : candidates) level.push_back({c, cache.at(c)});
    std::sort(level.begin(), level.end(), ranks_before);
    return level;
  };

  std::vector<std::vector<std::size_t>> candidates;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) candidates.push_back({a, b});

  for (std::size_t dim = 2; dim <= config.max_dim && !candidates.empty(); ++dim) {
    auto level = score_level(std::move(candidates));
    pool.insert(pool.end(), level.begin(), level.end());
    if (level.size() > config.beam_width) level.resize(config.beam_width);

    candidates.clear();
    if (dim == config.max_dim) break;
    for (const auto& member : level) {
      for (std::size_t extra = 0; extra < n; ++extra) {
        if (std::binary_search(member.dims.begin(), member.dims.end(), extra)) continue;
        auto next = member.dims;
        next.insert(std::upper_bound(next.begin(), next.end(), extra), extra);
        candidates.push_back(std::move(next));
      }
    }
  }

  if (config.min_score) {
    const double floor = *config.min_score;
    std::erase_if(pool, [floor](const SubspaceScore& s) { return s.score < floor; });
  }
  std::sort(pool.begin(), pool.end(), ranks_before);
  if (pool.size() > config.top_k) pool.resize(config.top_k);
  return pool;
}

}  // namespace uds
