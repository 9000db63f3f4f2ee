#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uds/dataset.hpp"
#include "uds/discretizer.hpp"

namespace uds {

struct ScoreConfig {
  std::size_t beta = kDefaultBeta;
  std::size_t max_beta = kDefaultMaxBeta;
  std::size_t max_exact_dims = 6;
};

// One term of the dependency sum: `target` conditioned on every column
// before it in the permutation. `discretized` is the column whose bins were
// chosen at this step; columns before it keep the bins chosen earlier.
struct ScoreStep {
  std::size_t target = 0;
  std::size_t discretized = 0;
  double h = 0.0;
  double conditional = 0.0;
  std::size_t bins = 1;
  std::size_t initial_bins = 1;
  bool capped = false;
};

struct ScoreResult {
  double score = 0.0;
  std::vector<std::size_t> permutation;
  std::vector<double> ce;  // h of each column, in permutation order
  std::vector<ScoreStep> steps;
  double numerator = 0.0;
  double denominator = 0.0;
};

namespace detail {

inline void check_dims(const Dataset& data, std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw std::invalid_argument("need >= 2 columns, got " + std::to_string(dims.size()));
  std::vector<char> seen(data.cols(), 0);
  for (auto d : dims) {
    if (d >= data.cols()) throw std::invalid_argument("unknown column id " + std::to_string(d));
    if (seen[d]) throw std::invalid_argument("column '" + data.name(d) + "' listed twice");
    seen[d] = 1;
  }
}

}  // namespace detail

// Normalized dependency of the columns taken in the given order. Each step
// discretizes the previous column to best explain the current one, given the
// cells formed by all earlier columns; earlier bins are never revisited.
inline ScoreResult score_permutation(const Dataset& data, std::span<const std::size_t> order,
                                     const ScoreConfig& config = {}, std::span<const double> ce = {}) {
  detail::check_dims(data, order);
  ScoreResult out;
  out.permutation.assign(order.begin(), order.end());
  if (ce.empty()) {
    for (auto c : order) out.ce.push_back(column_ce(data, c));
  } else {
    out.ce.assign(ce.begin(), ce.end());
  }

  const DiscretizeOptions options{config.beta, config.max_beta};
  auto cells = CellPartition::whole(data.rows());
  for (std::size_t i = 1; i < order.size(); ++i) {
    auto step = discretize(data, order[i - 1], order[i], cells, options, out.ce[i]);
    ScoreStep s;
    s.target = order[i];
    s.discretized = order[i - 1];
    s.h = out.ce[i];
    s.conditional = step.conditional_ce;
    s.bins = step.binning.bin_count();
    s.initial_bins = step.initial_bins;
    s.capped = step.capped;
    out.steps.push_back(s);
    out.numerator += s.h - s.conditional;
    out.denominator += s.h;
    if (i + 1 < order.size()) cells = extend_cells(cells, step.binning);
  }
  out.score = out.denominator > 0.0 ? out.numerator / out.denominator : 0.0;
  return out;
}

// Columns sorted by descending cumulative entropy, ties by ascending id.
inline std::vector<std::size_t> ce_order(const Dataset& data, std::span<const std::size_t> dims,
                                         std::vector<double>* ce_out = nullptr) {
  detail::check_dims(data, dims);
  std::vector<std::pair<double, std::size_t>> keyed;
  for (auto d : dims) keyed.emplace_back(column_ce(data, d), d);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> order;
  if (ce_out) ce_out->clear();
  for (const auto& [h, d] : keyed) {
    order.push_back(d);
    if (ce_out) ce_out->push_back(h);
  }
  return order;
}

inline ScoreResult uds_pr(const Dataset& data, std::span<const std::size_t> dims, const ScoreConfig& config = {}) {
  std::vector<double> ce;
  const auto order = ce_order(data, dims, &ce);
  return score_permutation(data, order, config, ce);
}

// Maximum of the normalized score over all orderings; only for small d.
inline ScoreResult uds_exact(const Dataset& data, std::span<const std::size_t> dims, const ScoreConfig& config = {}) {
  detail::check_dims(data, dims);
  if (dims.size() > config.max_exact_dims)
    throw std::invalid_argument("exact score supports at most " + std::to_string(config.max_exact_dims) +
                                " columns, got " + std::to_string(dims.size()));
  std::vector<std::size_t> order(dims.begin(), dims.end());
  std::sort(order.begin(), order.end());
  std::vector<double> ce_of(data.cols(), 0.0);
  for (auto d : order) ce_of[d] = column_ce(data, d);

  ScoreResult best;
  bool first = true;
  std::vector<double> ce(order.size());
  do {
    for (std::size_t i = 0; i < order.size(); ++i) ce[i] = ce_of[order[i]];
    auto r = score_permutation(data, order, config, ce);
    if (first || r.score > best.score) {
      best = std::move(r);
      first = false;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

// Unnormalized numerator (sum of h - conditional h) for a fixed order.
inline double unnormalized_score(const Dataset& data, std::span<const std::size_t> order,
                                 const ScoreConfig& config = {}) {
  return score_permutation(data, order, config).numerator;
}

}  // namespace uds
