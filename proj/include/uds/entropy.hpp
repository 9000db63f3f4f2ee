#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uds {

// Cumulative entropy of an already sorted sample, natural log:
//   h = -sum_{i=1}^{m-1} (x_{i+1} - x_i) (i/m) ln(i/m)
// Singletons and constant samples give 0.
inline double cumulative_entropy_sorted(std::span<const double> sorted) {
  const std::size_t m = sorted.size();
  if (m < 2) return 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  double sum = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    const double gap = sorted[i] - sorted[i - 1];
    if (gap == 0.0) continue;
    const double p = static_cast<double>(i) * inv_m;
    sum += gap * p * std::log(p);
  }
  return -sum;
}

inline double empirical_ce(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empirical_ce: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return cumulative_entropy_sorted(sorted);
}

// Non-empty, disjoint groups of record indices (the non-empty cells of a
// conditioning partition). Weights are group size over total size.
struct CellGroups {
  std::vector<std::vector<std::size_t>> groups;
};

// Weighted mean of the within-group cumulative entropies of `target`,
// accumulated in group order.
inline double conditional_ce(std::span<const double> target, const CellGroups& cells) {
  if (cells.groups.empty()) throw std::invalid_argument("conditional_ce: no cells");
  std::vector<char> seen(target.size(), 0);
  std::size_t total = 0;
  for (const auto& g : cells.groups) {
    if (g.empty()) throw std::invalid_argument("conditional_ce: empty cell");
    for (auto r : g) {
      if (r >= target.size())
        throw std::out_of_range("conditional_ce: record index " + std::to_string(r) + " out of range");
      if (seen[r]) throw std::invalid_argument("conditional_ce: record " + std::to_string(r) + " in two cells");
      seen[r] = 1;
    }
    total += g.size();
  }

  double sum = 0.0;
  std::vector<double> buf;
  for (const auto& g : cells.groups) {
    if (g.size() < 2) continue;
    buf.clear();
    for (auto r : g) buf.push_back(target[r]);
    std::sort(buf.begin(), buf.end());
    sum += static_cast<double>(g.size()) / static_cast<double>(total) * cumulative_entropy_sorted(buf);
  }
  return sum;
}

// Plug-in Shannon entropy (natural log) of a histogram of positive counts.
inline double shannon_entropy(std::span<const std::size_t> counts) {
  if (counts.empty()) throw std::invalid_argument("shannon_entropy: no counts");
  std::size_t total = 0;
  for (auto c : counts) {
    if (c == 0) throw std::invalid_argument("shannon_entropy: zero count");
    total += c;
  }
  const double t = static_cast<double>(total);
  double h = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / t;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace uds
