#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uds/dataset.hpp"
#include "uds/entropy.hpp"

namespace uds {

inline constexpr std::size_t kDefaultBeta = 20;
inline constexpr std::size_t kDefaultMaxBeta = 64;

// Cumulative entropy of one dataset column, using its cached sort order.
inline double column_ce(const Dataset& data, std::size_t column) {
  const auto order = data.rank_index(column);
  const auto values = data.column(column);
  std::vector<double> sorted(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) sorted[p] = values[order[p]];
  return cumulative_entropy_sorted(sorted);
}

// Equal-frequency pre-partition of one column. Bins are value intervals
// (l, u]; equal values always share a bin.
struct InitialBinning {
  std::size_t column = 0;
  std::size_t requested_bins = 0;
  std::vector<double> upper_bounds;               // strictly increasing, one per bin
  std::vector<std::vector<std::size_t>> members;  // record ids per bin, value order
  std::vector<std::uint32_t> bin_of_record;

  std::size_t bin_count() const { return members.size(); }
  std::size_t records() const { return bin_of_record.size(); }
  bool capped() const { return bin_count() < requested_bins; }
};

inline InitialBinning equal_frequency_bins(const Dataset& data, std::size_t column, std::size_t beta) {
  if (beta < 1) throw std::invalid_argument("equal_frequency_bins: beta must be >= 1");
  const auto order = data.rank_index(column);
  const auto values = data.column(column);
  const std::size_t m = order.size();

  // Positions p in (0, m) where sorted[p-1] < sorted[p]; a cut is only legal there.
  std::vector<std::size_t> gaps;
  for (std::size_t p = 1; p < m; ++p)
    if (values[order[p - 1]] < values[order[p]]) gaps.push_back(p);

  std::vector<std::size_t> cuts;
  if (gaps.size() + 1 <= beta) {
    cuts = gaps;
  } else {
    std::size_t prev = 0;
    for (std::size_t k = 1; k < beta; ++k) {
      const std::size_t ideal = (k * m + beta - 1) / beta;
      if (ideal <= prev) continue;
      // nearest legal gap strictly after the previous cut; ties go to the earlier gap
      auto it = std::lower_bound(gaps.begin(), gaps.end(), ideal);
      std::size_t best = 0;
      bool found = false;
      if (it != gaps.begin() && *(it - 1) > prev) {
        best = *(it - 1);
        found = true;
      }
      if (it != gaps.end() && (!found || *it - ideal < ideal - best)) {
        best = *it;
        found = true;
      }
      if (!found) continue;
      cuts.push_back(best);
      prev = best;
    }
  }

  InitialBinning out;
  out.column = column;
  out.requested_bins = beta;
  out.bin_of_record.assign(m, 0);
  std::size_t start = 0;
  cuts.push_back(m);
  for (std::size_t b = 0; b < cuts.size(); ++b) {
    std::vector<std::size_t> bin(order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(cuts[b]));
    for (auto r : bin) out.bin_of_record[r] = static_cast<std::uint32_t>(b);
    out.upper_bounds.push_back(values[order[cuts[b] - 1]]);
    out.members.push_back(std::move(bin));
    start = cuts[b];
  }
  return out;
}

// Assignment of records to the non-empty hypercubes spanned by the
// dimensions discretized so far. Cell ids are canonical: cells are numbered
// in lexicographic order of their bin-id keys, so the numbering depends only
// on which keys occur, never on record order.
class CellPartition {
 public:
  // One cell holding every record; no discretized dimensions.
  static CellPartition whole(std::size_t records) {
    CellPartition p;
    p.cell_of_record_.assign(records, 0);
    p.sizes_ = {records};
    p.keys_ = {{}};
    return p;
  }

  // Builds a partition from arbitrary integer labels (one conditioning
  // dimension with `bins` nominal bins). Cells are numbered by ascending label.
  static CellPartition from_labels(std::span<const std::uint32_t> labels, std::size_t bins) {
    if (labels.empty()) throw std::invalid_argument("from_labels: no records");
    std::uint32_t max_label = *std::max_element(labels.begin(), labels.end());
    if (bins == 0 || max_label >= bins) throw std::invalid_argument("from_labels: label exceeds bin count");
    std::vector<std::uint32_t> id(bins, kNone);
    std::vector<std::size_t> count(bins, 0);
    for (auto l : labels) ++count[l];
    CellPartition p;
    for (std::uint32_t l = 0; l < bins; ++l) {
      if (!count[l]) continue;
      id[l] = static_cast<std::uint32_t>(p.sizes_.size());
      p.sizes_.push_back(count[l]);
      p.keys_.push_back({l});
    }
    p.cell_of_record_.reserve(labels.size());
    for (auto l : labels) p.cell_of_record_.push_back(id[l]);
    p.bin_counts_ = {bins};
    return p;
  }

  std::size_t records() const { return cell_of_record_.size(); }
  std::size_t cell_count() const { return sizes_.size(); }
  std::span<const std::uint32_t> cell_of_record() const { return cell_of_record_; }
  std::span<const std::size_t> cell_sizes() const { return sizes_; }
  // Nominal bin counts e_1..e_|I| of the discretized dimensions.
  std::span<const std::size_t> bin_counts() const { return bin_counts_; }
  std::span<const std::uint32_t> key(std::size_t cell) const { return keys_.at(cell); }

  CellGroups groups() const {
    CellGroups g;
    g.groups.resize(cell_count());
    for (std::size_t r = 0; r < records(); ++r) g.groups[cell_of_record_[r]].push_back(r);
    return g;
  }

  // Refines every cell by the bin id of a new dimension.
  CellPartition extended(std::span<const std::uint32_t> bin_of_record, std::size_t bins) const {
    if (bin_of_record.size() != records())
      throw std::invalid_argument("extend_cells: binning covers " + std::to_string(bin_of_record.size()) +
                                  " records, partition has " + std::to_string(records()));
    const std::size_t k = cell_count();
    std::vector<std::size_t> count(k * bins, 0);
    for (std::size_t r = 0; r < records(); ++r) {
      if (bin_of_record[r] >= bins) throw std::invalid_argument("extend_cells: bin id out of range");
      ++count[cell_of_record_[r] * bins + bin_of_record[r]];
    }
    CellPartition p;
    std::vector<std::uint32_t> id(k * bins, kNone);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t slot = c * bins + b;
        if (!count[slot]) continue;
        id[slot] = static_cast<std::uint32_t>(p.sizes_.size());
        p.sizes_.push_back(count[slot]);
        auto key = keys_[c];
        key.push_back(static_cast<std::uint32_t>(b));
        p.keys_.push_back(std::move(key));
      }
    }
    p.cell_of_record_.resize(records());
    for (std::size_t r = 0; r < records(); ++r)
      p.cell_of_record_[r] = id[cell_of_record_[r] * bins + bin_of_record[r]];
    p.bin_counts_ = bin_counts_;
    p.bin_counts_.push_back(bins);
    return p;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  std::vector<std::uint32_t> cell_of_record_;
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<std::uint32_t>> keys_;
  std::vector<std::size_t> bin_counts_;
};

// Upper-triangular table of band conditional CE values. Indices are 0-based
// initial-bin positions; (first, last) is the inclusive band a_first..a_last.
class BandTable {
 public:
  BandTable() = default;
  explicit BandTable(std::size_t bins) : bins_(bins), data_(bins * bins, 0.0) {}

  std::size_t bins() const { return bins_; }
  double operator()(std::size_t first, std::size_t last) const { return data_[first * bins_ + last]; }
  double& at(std::size_t first, std::size_t last) {
    if (first > last || last >= bins_) throw std::out_of_range("BandTable: invalid band");
    return data_[first * bins_ + last];
  }

 private:
  std::size_t bins_ = 0;
  std::vector<double> data_;
};

// f(j, i) = conditional CE of the target given the cells, over the records
// of initial bins j..i. Target values are bucketed per (bin, cell) in sorted
// order by walking the target's rank index once; bands are then grown bin by
// bin, merging each cell's sorted run into the accumulated one.
inline BandTable band_ce_table(const Dataset& data, std::size_t target, const CellPartition& cells,
                               const InitialBinning& binning) {
  const std::size_t m = data.rows();
  if (cells.records() != m || binning.records() != m)
    throw std::invalid_argument("band_ce_table: population mismatch between dataset, cells and binning");

  const std::size_t beta = binning.bin_count();
  const std::size_t k = cells.cell_count();
  const auto values = data.column(target);
  const auto order = data.rank_index(target);
  const auto cell_of = cells.cell_of_record();

  // Counting sort into flat segments keyed by (bin, cell); rank order keeps
  // every segment sorted.
  std::vector<std::size_t> offset(beta * k + 1, 0);
  for (std::size_t r = 0; r < m; ++r) ++offset[binning.bin_of_record[r] * k + cell_of[r] + 1];
  for (std::size_t s = 1; s < offset.size(); ++s) offset[s] += offset[s - 1];
  std::vector<double> sorted(m);
  {
    std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
    for (auto r : order) sorted[cursor[binning.bin_of_record[r] * k + cell_of[r]]++] = values[r];
  }
  // cells present in each bin, ascending id
  std::vector<std::vector<std::uint32_t>> present(beta);
  for (std::size_t z = 0; z < beta; ++z)
    for (std::size_t c = 0; c < k; ++c)
      if (offset[z * k + c + 1] > offset[z * k + c]) present[z].push_back(static_cast<std::uint32_t>(c));

  BandTable f(beta);
  std::vector<std::vector<double>> acc(k);
  std::vector<double> ce(k, 0.0);
  std::vector<std::uint32_t> active;
  std::vector<char> is_active(k, 0);
  std::vector<double> merged;

  for (std::size_t j = 0; j < beta; ++j) {
    for (auto c : active) {
      acc[c].clear();
      ce[c] = 0.0;
      is_active[c] = 0;
    }
    active.clear();
    std::size_t band = 0;
    for (std::size_t i = j; i < beta; ++i) {
      bool new_cells = false;
      for (auto c : present[i]) {
        const auto* first = sorted.data() + offset[i * k + c];
        const auto* last = sorted.data() + offset[i * k + c + 1];
        merged.resize(acc[c].size() + static_cast<std::size_t>(last - first));
        std::merge(acc[c].begin(), acc[c].end(), first, last, merged.begin());
        acc[c].swap(merged);
        ce[c] = cumulative_entropy_sorted(acc[c]);
        band += static_cast<std::size_t>(last - first);
        if (!is_active[c]) {
          is_active[c] = 1;
          active.push_back(c);
          new_cells = true;
        }
      }
      if (new_cells) std::sort(active.begin(), active.end());

      double sum = 0.0;
      const double total = static_cast<double>(band);
      for (auto c : active)
        if (acc[c].size() > 1) sum += static_cast<double>(acc[c].size()) / total * ce[c];
      f.at(j, i) = sum;
    }
  }
  return f;
}

// Cumulative supports s[0..beta]: s[i] = records in the first i initial bins.
inline std::vector<std::size_t> cumulative_supports(const InitialBinning& binning) {
  std::vector<std::size_t> s(binning.bin_count() + 1, 0);
  for (std::size_t i = 0; i < binning.bin_count(); ++i) s[i + 1] = s[i] + binning.members[i].size();
  return s;
}

// Candidates within this relative distance of the incumbent count as tied,
// so a rounding-level difference cannot flip a choice (e.g. after rescaling).
inline constexpr double kTieTolerance = 1e-12;

inline bool clearly_less(double a, double incumbent) {
  if (std::isinf(incumbent)) return a < incumbent;
  return a < incumbent - kTieTolerance * std::abs(incumbent);
}

// Dynamic-programming table over prefixes of the initial bins.
// objective(lambda, i) is the smallest weighted conditional CE obtainable by
// merging the first i initial bins into lambda contiguous bins.
class MergeTable {
 public:
  MergeTable(std::vector<std::size_t> supports, BandTable f)
      : s_(std::move(supports)), f_(std::move(f)), beta_(f_.bins()) {
    if (s_.size() != beta_ + 1) throw std::invalid_argument("optimal_merge: supports do not match band table");
    if (beta_ == 0) throw std::invalid_argument("optimal_merge: no bins");
    for (std::size_t i = 1; i <= beta_; ++i)
      if (s_[i] <= s_[i - 1]) throw std::invalid_argument("optimal_merge: supports must be strictly increasing");
    const std::size_t w = beta_ + 1;
    val_.assign(w * w, std::numeric_limits<double>::infinity());
    split_.assign(w * w, 0);

    for (std::size_t i = 1; i <= beta_; ++i) val_[w + i] = f_(0, i - 1);
    for (std::size_t lambda = 2; lambda <= beta_; ++lambda) {
      for (std::size_t i = lambda; i <= beta_; ++i) {
        const double si = static_cast<double>(s_[i]);
        double best = std::numeric_limits<double>::infinity();
        std::size_t pos = lambda - 1;
        for (std::size_t j = lambda - 1; j < i; ++j) {
          const double sj = static_cast<double>(s_[j]);
          const double omega = (si - sj) / si * f_(j, i - 1) + sj / si * val_[(lambda - 1) * w + j];
          if (clearly_less(omega, best)) {
            best = omega;
            pos = j;
          }
        }
        val_[lambda * w + i] = best;
        split_[lambda * w + i] = pos;
      }
    }
  }

  std::size_t bins() const { return beta_; }
  std::span<const std::size_t> supports() const { return s_; }
  const BandTable& band() const { return f_; }

  double objective(std::size_t lambda, std::size_t prefix) const {
    check(lambda, prefix);
    return val_[lambda * (beta_ + 1) + prefix];
  }
  double objective(std::size_t lambda) const { return objective(lambda, beta_); }

  // End positions (prefix lengths) of the lambda merged bins over the first
  // `prefix` initial bins; the last entry equals `prefix`.
  std::vector<std::size_t> bin_ends(std::size_t lambda, std::size_t prefix) const {
    check(lambda, prefix);
    std::vector<std::size_t> ends(lambda);
    std::size_t i = prefix;
    for (std::size_t l = lambda; l >= 1; --l) {
      ends[l - 1] = i;
      if (l > 1) i = split_[l * (beta_ + 1) + i];
    }
    return ends;
  }
  std::vector<std::size_t> bin_ends(std::size_t lambda) const { return bin_ends(lambda, beta_); }

 private:
  void check(std::size_t lambda, std::size_t prefix) const {
    if (lambda < 1 || prefix > beta_ || lambda > prefix)
      throw std::out_of_range("MergeTable: need 1 <= lambda <= prefix <= beta");
  }

  std::vector<std::size_t> s_;
  BandTable f_;
  std::size_t beta_;
  std::vector<double> val_;
  std::vector<std::size_t> split_;
};

inline MergeTable optimal_merge(std::vector<std::size_t> supports, BandTable f) {
  return MergeTable(std::move(supports), std::move(f));
}

// A discretization of one column obtained by merging contiguous initial bins.
struct Binning {
  std::size_t column = 0;
  std::vector<std::size_t> ends;  // initial-bin prefix lengths closing each bin
  std::vector<double> upper_bounds;
  std::vector<std::uint32_t> bin_of_record;

  std::size_t bin_count() const { return ends.size(); }
};

inline Binning merge_bins(const InitialBinning& initial, std::span<const std::size_t> ends) {
  if (ends.empty() || ends.back() != initial.bin_count())
    throw std::invalid_argument("merge_bins: ends must close at the last initial bin");
  Binning out;
  out.column = initial.column;
  out.ends.assign(ends.begin(), ends.end());
  std::vector<std::uint32_t> merged_of(initial.bin_count());
  std::size_t start = 0;
  for (std::size_t b = 0; b < ends.size(); ++b) {
    if (ends[b] <= start) throw std::invalid_argument("merge_bins: ends must be strictly increasing");
    for (std::size_t z = start; z < ends[b]; ++z) merged_of[z] = static_cast<std::uint32_t>(b);
    out.upper_bounds.push_back(initial.upper_bounds[ends[b] - 1]);
    start = ends[b];
  }
  out.bin_of_record.resize(initial.records());
  for (std::size_t r = 0; r < initial.records(); ++r) out.bin_of_record[r] = merged_of[initial.bin_of_record[r]];
  return out;
}

inline CellPartition extend_cells(const CellPartition& cells, const Binning& binning) {
  return cells.extended(binning.bin_of_record, binning.bin_count());
}

struct BinCountChoice {
  std::size_t bins = 1;               // lambda*
  std::vector<double> cost;           // indexed by lambda, cost[0] unused
  std::vector<double> joint_entropy;  // H(I, X_lambda), indexed by lambda
};

// Picks lambda in [1, beta] minimizing
//   objective(lambda) / h_target + H(I, X_lambda) / (ln beta + sum ln e_i)
// where H is the plug-in entropy of the non-empty joint cells. A zero
// h_target makes the first term 0. Ties (up to kTieTolerance) go to the
// smaller lambda.
inline BinCountChoice select_bin_count(const MergeTable& table, double h_target, const CellPartition& cells,
                                       const InitialBinning& initial) {
  const std::size_t beta = table.bins();
  if (initial.bin_count() != beta) throw std::invalid_argument("select_bin_count: binning does not match table");
  if (cells.records() != initial.records()) throw std::invalid_argument("select_bin_count: population mismatch");

  BinCountChoice out;
  out.cost.assign(beta + 1, 0.0);
  out.joint_entropy.assign(beta + 1, 0.0);
  if (beta == 1) {
    out.cost[1] = h_target > 0.0 ? table.objective(1) / h_target : 0.0;
    return out;
  }

  const std::size_t k = cells.cell_count();
  std::vector<std::size_t> count(k * beta, 0);
  const auto cell_of = cells.cell_of_record();
  for (std::size_t r = 0; r < cells.records(); ++r) ++count[cell_of[r] * beta + initial.bin_of_record[r]];

  double denom = std::log(static_cast<double>(beta));
  for (auto e : cells.bin_counts()) denom += std::log(static_cast<double>(e));

  std::vector<std::size_t> joint;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t lambda = 1; lambda <= beta; ++lambda) {
    const auto ends = table.bin_ends(lambda);
    joint.clear();
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t start = 0;
      for (auto end : ends) {
        std::size_t n = 0;
        for (std::size_t z = start; z < end; ++z) n += count[c * beta + z];
        if (n) joint.push_back(n);
        start = end;
      }
    }
    const double h_joint = shannon_entropy(joint);
    const double fit = h_target > 0.0 ? table.objective(lambda) / h_target : 0.0;
    const double cost = fit + h_joint / denom;
    out.cost[lambda] = cost;
    out.joint_entropy[lambda] = h_joint;
    if (clearly_less(cost, best)) {
      best = cost;
      out.bins = lambda;
    }
  }
  return out;
}

struct DiscretizeOptions {
  std::size_t beta = kDefaultBeta;
  std::size_t max_beta = kDefaultMaxBeta;
};

// Outcome of discretizing one column against one target given the cells of
// the dimensions already discretized.
struct Discretization {
  Binning binning;
  std::size_t initial_bins = 0;  // effective beta after tie capping
  bool capped = false;
  double h_target = 0.0;
  double conditional_ce = 0.0;  // objective(lambda*)
  BinCountChoice choice;
};

inline Discretization discretize(const Dataset& data, std::size_t column, std::size_t target,
                                 const CellPartition& cells, const DiscretizeOptions& options = {},
                                 double h_target = -1.0) {
  if (options.beta < 1) throw std::invalid_argument("beta must be >= 1");
  if (options.beta > options.max_beta)
    throw std::invalid_argument("beta " + std::to_string(options.beta) + " exceeds cap " +
                                std::to_string(options.max_beta));
  auto initial = equal_frequency_bins(data, column, options.beta);
  if (h_target < 0.0) h_target = column_ce(data, target);
  auto table = optimal_merge(cumulative_supports(initial), band_ce_table(data, target, cells, initial));
  auto choice = select_bin_count(table, h_target, cells, initial);

  Discretization out;
  out.binning = merge_bins(initial, table.bin_ends(choice.bins));
  out.initial_bins = initial.bin_count();
  out.capped = initial.capped();
  out.h_target = h_target;
  out.conditional_ce = table.objective(choice.bins);
  out.choice = std::move(choice);
  return out;
}

}  // namespace uds
