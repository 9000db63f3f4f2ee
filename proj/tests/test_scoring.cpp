#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "uds/harness.hpp"
#include "uds/scoring.hpp"

using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::size_t> all_dims(const uds::Dataset& d) {
  std::vector<std::size_t> dims(d.cols());
  std::iota(dims.begin(), dims.end(), std::size_t{0});
  return dims;
}

// x_r = frac(r * golden ratio): a deterministic, evenly spread sample.
std::vector<double> golden_sequence(std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t r = 0; r < m; ++r) x[r] = std::fmod(static_cast<double>(r) * 0.6180339887498949, 1.0);
  return x;
}

}  // namespace

TEST_CASE("constant columns score zero", "[scoring]") {
  const uds::Dataset d({{2, 2, 2, 2}, {5, 5, 5, 5}, {1, 1, 1, 1}});
  const auto r = uds::uds_pr(d, all_dims(d));
  CHECK(r.score == 0.0);
  CHECK(r.numerator == 0.0);
  CHECK(r.denominator == 0.0);
}

TEST_CASE("exact affine dependence", "[scoring]") {
  const auto x = golden_sequence(1000);
  std::vector<double> y(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) y[r] = 2.0 * x[r] + 1.0;
  const uds::Dataset d({x, y});
  const auto r = uds::uds_pr(d, all_dims(d));

  // y has the larger spread so it comes first and is discretized for x.
  CHECK(r.permutation == std::vector<std::size_t>{1, 0});
  // Within each of lambda equal-frequency bins the target is uniform on
  // 1/lambda of its range, so conditional/unconditional is about 1/lambda.
  REQUIRE(r.steps.size() == 1);
  CHECK(r.steps[0].bins == 3);
  CHECK_THAT(r.score, WithinAbs(1.0 - 1.0 / 3.0, 0.01));
  CHECK_THAT(r.score, WithinAbs(0.66504237349285789, 1e-12));  // pinned regression
  CHECK(r.steps[0].conditional <= r.steps[0].h);
}

TEST_CASE("independent uniform columns stay below the null cutoff", "[scoring]") {
  std::vector<double> null_scores;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto data = uds::gen_null(2, 4000, uds::derive_seed(12, 1, k));
    null_scores.push_back(uds::uds_pr(data, all_dims(data)).score);
  }
  const double cutoff = uds::null_cutoff(null_scores, 0.05);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(4000), b(4000);
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  const uds::Dataset d({a, b});
  const auto r = uds::uds_pr(d, all_dims(d));
  CHECK_FALSE(r.score > cutoff);
  // independence is fit with a single bin, which leaves h unchanged
  CHECK(uds::unnormalized_score(d, std::vector<std::size_t>{0, 1}) == 0.0);
}

TEST_CASE("uds_exact enumerates every ordering", "[scoring]") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(600), y(600), z(600);
  for (std::size_t r = 0; r < 600; ++r) {
    x[r] = g(rng);
    y[r] = x[r] * x[r] + 0.1 * g(rng);
    z[r] = std::sin(y[r]) + 0.1 * g(rng);
  }
  const uds::Dataset d({x, y, z});
  const auto dims = all_dims(d);
  const auto exact = uds::uds_exact(d, dims);
  const auto practical = uds::uds_pr(d, dims);

  std::vector<std::size_t> order = dims;
  double best = -1.0;
  std::vector<std::size_t> best_order;
  do {
    const double s = uds::score_permutation(d, order).score;
    if (s > best) {
      best = s;
      best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  CHECK(exact.score == best);
  CHECK(exact.permutation == best_order);
  CHECK(exact.score >= practical.score);

  SECTION("two columns: maximum of both orders") {
    const std::vector<std::size_t> pair{0, 1};
    const double ab = uds::score_permutation(d, std::vector<std::size_t>{0, 1}).score;
    const double ba = uds::score_permutation(d, std::vector<std::size_t>{1, 0}).score;
    CHECK(uds::uds_exact(d, pair).score == std::max(ab, ba));
  }
}

TEST_CASE("unnormalized score grows when a column is appended", "[scoring][property]") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const auto d = uds::testing::random_dataset(rng, 10 + rng() % 150, 5);
    std::vector<std::size_t> order = all_dims(d);
    std::shuffle(order.begin(), order.end(), rng);
    double prev = 0.0;
    for (std::size_t len = 2; len <= order.size(); ++len) {
      const std::span<const std::size_t> prefix(order.data(), len);
      const auto r = uds::score_permutation(d, prefix);
      CHECK(r.numerator >= prev);
      double bound = 0.0;
      for (std::size_t i = 1; i < len; ++i) bound += r.ce[i];
      CHECK(r.numerator <= bound);
      prev = r.numerator;
    }
  }
}

TEST_CASE("uds_pr range and invariances", "[scoring][property]") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 5 + rng() % 150;
    const std::size_t n = 2 + rng() % 4;
    const auto d = uds::testing::random_dyadic_dataset(rng, m, n);
    const auto dims = all_dims(d);
    const auto base = uds::uds_pr(d, dims);
    CHECK(base.score >= 0.0);
    CHECK(base.score <= 1.0);
    for (const auto& s : base.steps) CHECK(s.conditional <= s.h);

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(uds::uds_pr(uds::testing::permute_rows(d, perm), dims).score == base.score);

    std::vector<double> shift(n);
    for (auto& s : shift) s = static_cast<double>(static_cast<int>(rng() % 2001) - 1000);
    CHECK(uds::uds_pr(uds::testing::transform_columns(d, shift, 1.0), dims).score == base.score);

    const auto scaled = uds::uds_pr(uds::testing::transform_columns(d, std::vector<double>(n, 0.0), 3.7), dims);
    CHECK_THAT(scaled.score, WithinAbs(base.score, 1e-9));

    const auto again = uds::uds_pr(d, dims);
    CHECK(again.score == base.score);
    CHECK(again.permutation == base.permutation);
  }
}

TEST_CASE("uds_pr sorts by descending CE with index tie-break", "[scoring]") {
  const uds::Dataset d({{0, 1, 2, 3}, {0, 2, 4, 6}, {0, 1, 2, 3}});
  const auto r = uds::uds_pr(d, std::vector<std::size_t>{2, 0, 1});
  CHECK(r.permutation == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("scoring argument errors", "[scoring]") {
  const uds::Dataset d({{1, 2, 3}, {3, 1, 2}, {2, 2, 1}});
  CHECK_THROWS_AS(uds::uds_pr(d, std::vector<std::size_t>{0}), std::invalid_argument);
  CHECK_THROWS_AS(uds::uds_pr(d, std::vector<std::size_t>{0, 5}), std::invalid_argument);
  CHECK_THROWS_AS(uds::uds_pr(d, std::vector<std::size_t>{1, 1}), std::invalid_argument);
  uds::ScoreConfig tight;
  tight.max_exact_dims = 2;
  CHECK_THROWS_AS(uds::uds_exact(d, std::vector<std::size_t>{0, 1, 2}, tight), std::invalid_argument);
  CHECK_THROWS_AS(uds::unnormalized_score(d, std::vector<std::size_t>{2}), std::invalid_argument);
}
