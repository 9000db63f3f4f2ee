#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uds/dataset.hpp"
#include "uds/parallel.hpp"
#include "uds/scoring.hpp"

namespace uds {

// Response functions applied to the latent mixtures.
enum class Response { f1, f2, f3, f4 };

inline double apply_response(Response f, double x) {
  switch (f) {
    case Response::f1: return 2.0 * x + 1.0;
    case Response::f2: return x * x - 2.0 * x;
    case Response::f3: return std::log(std::abs(x) + 1.0);
    case Response::f4: return std::sin(2.0 * x);
  }
  return x;
}

inline std::optional<Response> parse_response(std::string_view name) {
  if (name == "f1") return Response::f1;
  if (name == "f2") return Response::f2;
  if (name == "f3") return Response::f3;
  if (name == "f4") return Response::f4;
  return std::nullopt;
}

inline const char* response_name(Response f) {
  switch (f) {
    case Response::f1: return "f1";
    case Response::f2: return "f2";
    case Response::f3: return "f3";
    case Response::f4: return "f4";
  }
  return "?";
}

// Seeds are expanded with splitmix64 and fed to std::mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

struct GenConfig {
  std::size_t n = 20;  // even; n/2 latent mixtures and n/2 responses
  std::size_t m = 4000;
  Response f = Response::f1;
  double sigma_rel = 0.1;  // noise sd as a fraction of the sd of each W_i
  std::size_t extra = 0;   // appended independent N(0,1) columns
  std::uint64_t seed = 0;
};

// X = A Z with Z ~ N(0, I) and a_ij ~ U[0,1]; W = B X with b_ij ~ U[0,0.5];
// X_{i+l} = f(W_i) + N(0, sigma_rel * sd(W_i)). A and B are drawn once.
inline Dataset gen_correlated(const GenConfig& config) {
  if (config.n < 2 || config.n % 2) throw std::invalid_argument("gen_correlated: n must be even and >= 2");
  if (config.m < 2) throw std::invalid_argument("gen_correlated: m must be >= 2");
  if (!(config.sigma_rel >= 0.0)) throw std::invalid_argument("gen_correlated: sigma must be >= 0");

  const std::size_t l = config.n / 2;
  const std::size_t m = config.m;
  std::mt19937_64 rng(splitmix64(config.seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> half(0.0, 0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> a(l * l), b(l * l);
  for (auto& v : a) v = unit(rng);
  for (auto& v : b) v = half(rng);

  std::vector<std::vector<double>> cols(config.n + config.extra, std::vector<double>(m));
  std::vector<std::vector<double>> w(l, std::vector<double>(m));
  std::vector<double> z(l);
  for (std::size_t r = 0; r < m; ++r) {
    for (auto& v : z) v = gauss(rng);
    for (std::size_t i = 0; i < l; ++i) {
      double x = 0.0;
      for (std::size_t j = 0; j < l; ++j) x += a[i * l + j] * z[j];
      cols[i][r] = x;
    }
    for (std::size_t i = 0; i < l; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) s += b[i * l + j] * cols[j][r];
      w[i][r] = s;
    }
  }
  for (std::size_t i = 0; i < l; ++i) {
    const double mean = std::accumulate(w[i].begin(), w[i].end(), 0.0) / static_cast<double>(m);
    double ss = 0.0;
    for (auto v : w[i]) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1)) * config.sigma_rel;
    for (std::size_t r = 0; r < m; ++r) {
      const double noise = sd > 0.0 ? sd * gauss(rng) : 0.0;
      cols[l + i][r] = apply_response(config.f, w[i][r]) + noise;
    }
  }
  for (std::size_t e = 0; e < config.extra; ++e)
    for (auto& v : cols[config.n + e]) v = gauss(rng);
  return Dataset(std::move(cols));
}

// Independent N(0,1) columns.
inline Dataset gen_null(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 1 || m < 2) throw std::invalid_argument("gen_null: need n >= 1 and m >= 2");
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) cols[c][r] = gauss(rng);
  return Dataset(std::move(cols));
}

// How the dimensionalities of the two arms relate.
enum class Layout {
  equal,       // both arms have n columns
  null_extra,  // null arm has n + extra, correlated arm n
  alt_extra,   // correlated arm has n + extra, null arm n
  mixed,       // every dataset draws its dimensionality uniformly from [min_dim, max_dim]
};

struct PowerConfig {
  GenConfig gen;
  Layout layout = Layout::equal;
  double alpha = 0.05;
  std::size_t runs = 100;
  std::size_t min_dim = 2;   // mixed layout only
  std::size_t max_dim = 50;  // mixed layout only
  bool null_vs_null = false;  // both arms independent (calibration check)
  unsigned threads = 1;
};

using Measure = std::function<double(const Dataset&)>;

// uds_pr over all columns of a dataset.
inline Measure uds_measure(ScoreConfig config = {}) {
  return [config](const Dataset& data) {
    std::vector<std::size_t> dims(data.cols());
    std::iota(dims.begin(), dims.end(), std::size_t{0});
    return uds_pr(data, dims, config).score;
  };
}

struct PowerReport {
  double cutoff = 0.0;
  double power = 0.0;
  std::vector<double> null_scores;
  std::vector<double> alt_scores;
  std::vector<std::size_t> null_dims;
  std::vector<std::size_t> alt_dims;
  PowerConfig config;
  double null_seconds = 0.0;
  double alt_seconds = 0.0;
};

// Rank of the cutoff order statistic: ceil((1 - alpha) * runs), 1-based,
// clamped to [1, runs].
inline std::size_t cutoff_rank(double alpha, std::size_t runs) {
  const double x = (1.0 - alpha) * static_cast<double>(runs);
  auto rank = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return std::clamp<std::size_t>(rank, 1, runs);
}

inline double null_cutoff(std::vector<double> null_scores, double alpha) {
  if (null_scores.empty()) throw std::invalid_argument("null_cutoff: no scores");
  const std::size_t rank = cutoff_rank(alpha, null_scores.size());
  std::nth_element(null_scores.begin(), null_scores.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   null_scores.end());
  return null_scores[rank - 1];
}

namespace detail {

enum Arm : std::uint64_t { kNullArm = 1, kAltArm = 2, kNullDimStream = 3, kAltDimStream = 4 };

inline std::size_t mixed_dims(const PowerConfig& config, std::uint64_t stream, std::size_t run) {
  std::mt19937_64 rng(derive_seed(config.gen.seed, stream, run));
  std::uniform_int_distribution<std::size_t> pick(config.min_dim, config.max_dim);
  return pick(rng);
}

inline Dataset make_null(const PowerConfig& config, std::uint64_t arm, std::size_t dims, std::size_t run) {
  return gen_null(dims, config.gen.m, derive_seed(config.gen.seed, arm, run));
}

}  // namespace detail

inline PowerReport statistical_power(const Measure& measure, const PowerConfig& config) {
  if (config.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (config.layout == Layout::mixed && (config.min_dim < 2 || config.min_dim > config.max_dim))
    throw std::invalid_argument("mixed layout needs 2 <= min_dim <= max_dim");
  if (config.gen.n < 2 || config.gen.n % 2) throw std::invalid_argument("n must be even and >= 2");

  const auto& g = config.gen;
  PowerReport report;
  report.config = config;
  report.null_scores.resize(config.runs);
  report.alt_scores.resize(config.runs);
  report.null_dims.resize(config.runs);
  report.alt_dims.resize(config.runs);

  auto null_dims = [&](std::size_t run) -> std::size_t {
    switch (config.layout) {
      case Layout::null_extra: return g.n + g.extra;
      case Layout::mixed: return detail::mixed_dims(config, detail::kNullDimStream, run);
      default: return g.n;
    }
  };

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  parallel_for(config.runs, config.threads, [&](std::size_t run) {
    const auto data = detail::make_null(config, detail::kNullArm, null_dims(run), run);
    report.null_dims[run] = data.cols();
    report.null_scores[run] = measure(data);
  });
  auto t1 = clock::now();
  parallel_for(config.runs, config.threads, [&](std::size_t run) {
    GenConfig gc = g;
    gc.seed = derive_seed(g.seed, detail::kAltArm, run);
    gc.extra = config.layout == Layout::alt_extra ? g.extra : 0;
    if (config.layout == Layout::mixed) {
      const std::size_t d = detail::mixed_dims(config, detail::kAltDimStream, run);
      gc.n = d - d % 2;
      gc.extra = d % 2;
    }
    const auto data = config.null_vs_null ? detail::make_null(config, detail::kAltArm, gc.n + gc.extra, run)
                                          : gen_correlated(gc);
    report.alt_dims[run] = data.cols();
    report.alt_scores[run] = measure(data);
  });
  auto t2 = clock::now();

  report.null_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.alt_seconds = std::chrono::duration<double>(t2 - t1).count();
  report.cutoff = null_cutoff(report.null_scores, config.alpha);
  const auto above = std::count_if(report.alt_scores.begin(), report.alt_scores.end(),
                                   [&](double s) { return s > report.cutoff; });
  report.power = static_cast<double>(above) / static_cast<double>(config.runs);
  return report;
}

// Betas at or below this value are outside the range where power is stable.
inline constexpr std::size_t kStableBetaFloor = 10;

struct BetaPower {
  std::size_t beta = 0;
  bool below_stability_threshold = false;
  PowerReport report;
};

inline std::vector<std::size_t> default_beta_grid() { return {5, 10, 15, 20, 25, 30, 35, 40}; }

inline std::vector<BetaPower> beta_sensitivity(const PowerConfig& config, const std::vector<std::size_t>& betas,
                                               const ScoreConfig& base = {}) {
  std::vector<BetaPower> out;
  for (auto beta : betas) {
    ScoreConfig sc = base;
    sc.beta = beta;
    if (beta < 1 || beta > sc.max_beta) throw std::invalid_argument("beta " + std::to_string(beta) + " out of range");
    out.push_back({beta, beta <= kStableBetaFloor, statistical_power(uds_measure(sc), config)});
  }
  return out;
}

struct BenchOptions {
  Response f = Response::f1;
  double sigma_rel = 0.1;
  std::size_t reps = 3;
  ScoreConfig score;
};

struct BenchRow {
  std::size_t m = 0;
  std::size_t n = 0;
  double seconds = 0.0;  // median over reps
};

// Times uds_pr over all columns for every (m, n) pair.
inline std::vector<BenchRow> runtime_bench(const std::vector<std::size_t>& ms, const std::vector<std::size_t>& ns,
                                           std::uint64_t seed, const BenchOptions& options = {}) {
  std::vector<BenchRow> rows;
  const auto measure = uds_measure(options.score);
  const std::size_t reps = std::max<std::size_t>(1, options.reps);
  for (auto n : ns) {
    for (auto m : ms) {
      GenConfig gc;
      gc.n = n;
      gc.m = m;
      gc.f = options.f;
      gc.sigma_rel = options.sigma_rel;
      gc.seed = derive_seed(seed, n, m);
      const auto data = gen_correlated(gc);
      std::vector<double> times;
      volatile double sink = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        sink = sink + measure(data);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      std::sort(times.begin(), times.end());
      rows.push_back({m, n, times[times.size() / 2]});
    }
  }
  return rows;
}

}  // namespace uds
