#include <catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "uds/dataset.hpp"

namespace {

std::vector<std::size_t> one_based(std::span<const std::size_t> order) {
  std::vector<std::size_t> out;
  for (auto r : order) out.push_back(r + 1);
  return out;
}

}  // namespace

TEST_CASE("parse_csv reads a headed table", "[dataset]") {
  const auto d = uds::parse_csv("a,b\n1,2\n3,4\n5,6");
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 2);
  CHECK(d.names() == std::vector<std::string>{"a", "b"});
  CHECK(d.column(1)[2] == 6.0);
  CHECK(d.find("b") == 1u);
  CHECK_FALSE(d.find("c"));
}

TEST_CASE("parse_csv options and formats", "[dataset]") {
  SECTION("no header synthesizes names") {
    const auto d = uds::parse_csv("1;2;3\n4;5;6\n", {false, ';', false});
    CHECK(d.names() == std::vector<std::string>{"col1", "col2", "col3"});
    CHECK(d.column(2)[1] == 6.0);
  }
  SECTION("scientific notation, quotes, CRLF, blank lines") {
    const auto d = uds::parse_csv("\"x\",\"y, z\"\r\n1e-3, -2.5E2\r\n\r\n\"+4\",5\r\n");
    CHECK(d.name(1) == "y, z");
    CHECK(d.column(0)[0] == 1e-3);
    CHECK(d.column(1)[0] == -250.0);
    CHECK(d.column(0)[1] == 4.0);
  }
  SECTION("drop-na removes whole rows") {
    const auto d = uds::parse_csv("a,b\n1,2\nNA,3\n4,\n5,6\n7,NaN\n", {true, ',', true});
    CHECK(d.rows() == 2);
    CHECK(d.column(0)[1] == 5.0);
  }
}

TEST_CASE("parse_csv rejects invalid input", "[dataset]") {
  auto message = [](const std::string& text) {
    try {
      uds::parse_csv(text);
    } catch (const uds::DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const auto nan = message("a,b\n1,2\n3,NaN\n");
  CHECK(nan.find("line 3") != std::string::npos);
  CHECK(nan.find("column 2") != std::string::npos);
  CHECK(message("a,b\n1,2\n3,inf\n").find("non-finite") != std::string::npos);
  CHECK(message("a,b\n1,2\n").find("m >= 2") != std::string::npos);
  CHECK(message("a,b\n1,2\n3\n").find("expected 2 fields") != std::string::npos);
  CHECK(message("a,a\n1,2\n3,4\n").find("duplicate") != std::string::npos);
  CHECK(message("a,\n1,2\n3,4\n").find("empty name") != std::string::npos);
  CHECK(message("a,b\n1,x\n3,4\n").find("cannot parse 'x'") != std::string::npos);
  CHECK(message("").find("no rows") != std::string::npos);
  CHECK_THROWS_AS(uds::load_csv("/nonexistent/file.csv"), uds::DataError);
}

TEST_CASE("rank_index", "[dataset]") {
  const uds::Dataset d({{3.0, 1.0, 2.0}, {1.0, 2.0, 3.0}, {5.0, 5.0, 1.0}});
  CHECK(one_based(uds::rank_index(d, 0)) == std::vector<std::size_t>{2, 3, 1});
  CHECK(one_based(uds::rank_index(d, 1)) == std::vector<std::size_t>{1, 2, 3});
  CHECK(one_based(uds::rank_index(d, 2)) == std::vector<std::size_t>{3, 1, 2});
  CHECK_THROWS_AS(uds::rank_index(d, 3), std::invalid_argument);
}

TEST_CASE("rank_index sorts fuzzed columns stably", "[dataset][property]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = uds::testing::random_dataset(rng, 2 + rng() % 200, 3);
    for (std::size_t c = 0; c < d.cols(); ++c) {
      const auto order = d.rank_index(c);
      const auto v = d.column(c);
      std::vector<char> hit(d.rows(), 0);
      for (std::size_t p = 0; p < order.size(); ++p) {
        hit[order[p]] = 1;
        if (p) {
          REQUIRE(v[order[p - 1]] <= v[order[p]]);
          if (v[order[p - 1]] == v[order[p]]) REQUIRE(order[p - 1] < order[p]);
        }
      }
      CHECK(std::count(hit.begin(), hit.end(), 1) == static_cast<long>(d.rows()));
    }
  }
}

TEST_CASE("CSV round trip is bit-exact", "[dataset][property]") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> cols(4, std::vector<double>(30));
    for (auto& c : cols)
      for (auto& x : c) x = g(rng) * std::pow(10.0, static_cast<double>(rng() % 40) - 20.0);
    const uds::Dataset d(cols);
    std::ostringstream out;
    uds::write_csv(d, out);
    const auto back = uds::parse_csv(out.str());
    REQUIRE(back.names() == d.names());
    for (std::size_t c = 0; c < d.cols(); ++c)
      for (std::size_t r = 0; r < d.rows(); ++r)
        CHECK(std::memcmp(&back.column(c)[r], &d.column(c)[r], sizeof(double)) == 0);
  }
}

TEST_CASE("load_csv reads files", "[dataset]") {
  const auto path = std::filesystem::temp_directory_path() / "uds_test_dataset.csv";
  {
    std::ofstream f(path);
    f << "p,q\n1,2\n3,4\n";
  }
  const auto d = uds::load_csv(path);
  CHECK(d.rows() == 2);
  std::filesystem::remove(path);
}
