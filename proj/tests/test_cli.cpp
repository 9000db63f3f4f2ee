#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(UDS_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "uds_cli_test";
  fs::create_directories(dir);
  return dir;
}

// x on a grid, y = 2x + 1, z unrelated
fs::path write_sample() {
  const auto path = scratch() / "sample.csv";
  std::ofstream f(path);
  f << "x,y,z\n";
  for (int r = 0; r < 400; ++r) {
    const double x = (r * 37 % 400) / 400.0;
    f << x << ',' << 2 * x + 1 << ',' << (r * 113 % 257) / 257.0 << '\n';
  }
  return path;
}

}  // namespace

TEST_CASE("score prints a JSON result", "[cli]") {
  const auto csv = write_sample();
  const auto r = run("score --input " + csv.string() + " --columns x,y");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const double score = j.at("result").at("score");
  CHECK(score > 0.5);
  CHECK(score <= 1.0);
  CHECK(j.at("manifest").at("command") == "score");

  const auto exact = nlohmann::json::parse(run("score --input " + csv.string() + " --columns x,y --exact").out);
  CHECK(double(exact.at("result").at("score")) >= score);
}

TEST_CASE("argument and data errors map to exit codes", "[cli]") {
  const auto csv = write_sample().string();
  CHECK(run("score --input " + csv + " --columns x").code == 2);
  CHECK(run("score --input " + csv + " --columns x,nope").code == 2);
  CHECK(run("score --input " + csv + " --columns x,y --beta 0").code == 2);
  CHECK(run("score --columns x,y").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);

  const auto bad = scratch() / "bad.csv";
  {
    std::ofstream f(bad);
    f << "a,b\n1,2\n3,oops\n";
  }
  CHECK(run("score --input " + bad.string() + " --columns a,b").code == 3);
  CHECK(run("score --input /nonexistent.csv --columns a,b").code == 3);
}

TEST_CASE("search writes ranked subspaces", "[cli]") {
  const auto csv = write_sample().string();
  const auto prefix = (scratch() / "search").string();
  REQUIRE(run("search --input " + csv + " --top-k 1 --out " + prefix).code == 0);
  std::istringstream tsv(slurp(prefix + ".tsv"));
  std::string header, row, extra;
  std::getline(tsv, header);
  std::getline(tsv, row);
  CHECK(header.rfind("rank", 0) == 0);
  CHECK(row.find("x,y") != std::string::npos);
  CHECK_FALSE(std::getline(tsv, extra));
  const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
  CHECK(j.at("manifest").at("command") == "search");
}

TEST_CASE("power output is byte-identical across runs and thread counts", "[cli]") {
  const auto a = (scratch() / "power_a").string();
  const auto b = (scratch() / "power_b").string();
  const std::string args = "power --f f2 --m 200 --n 4 --runs 4 --seed 99";
  REQUIRE(run(args + " --threads 1 --out " + a).code == 0);
  REQUIRE(run(args + " --threads 2 --out " + b).code == 0);
  CHECK(slurp(a + ".json") == slurp(b + ".json"));
  CHECK(slurp(a + ".tsv") == slurp(b + ".tsv"));
  CHECK_FALSE(slurp(a + ".tsv").empty());
  CHECK(run("power --n 5 --runs 2 --seed 1 --out " + a).code == 2);
}

TEST_CASE("beta and bench subcommands", "[cli]") {
  const auto p = (scratch() / "beta").string();
  REQUIRE(run("beta --m 150 --n 4 --runs 3 --seed 2 --betas 5,15 --out " + p).code == 0);
  const auto j = nlohmann::json::parse(slurp(p + ".json"));
  CHECK(j.dump().find("5") != std::string::npos);

  const auto q = (scratch() / "bench").string();
  REQUIRE(run("bench --ms 100,200 --ns 4 --reps 1 --seed 3 --out " + q).code == 0);
  std::istringstream tsv(slurp(q + ".tsv"));
  std::string line;
  int lines = 0;
  while (std::getline(tsv, line)) ++lines;
  CHECK(lines == 3);
}
