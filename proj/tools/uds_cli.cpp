// uds: command-line front end for scoring, subspace search and the
// synthetic power experiments.
//
// Exit codes: 0 success, 2 usage error, 3 data error.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uds/report.hpp"
#include "uds/uds.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct InputArgs {
  std::string path;
  bool no_header = false;
  char delimiter = ',';
  bool drop_na = false;
};

void add_input_flags(CLI::App* cmd, InputArgs& in) {
  cmd->add_option("--input,-i", in.path, "CSV file")->required();
  cmd->add_flag("--no-header", in.no_header, "first row is data, columns are named col1..colN");
  cmd->add_option("--delimiter", in.delimiter, "field delimiter");
  cmd->add_flag("--drop-na", in.drop_na, "drop rows containing empty/NA cells");
}

uds::Dataset read_input(const InputArgs& in) {
  return uds::load_csv(in.path, {!in.no_header, in.delimiter, in.drop_na});
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
    }
    if (pos != item.size() || v < 1)
      throw std::invalid_argument(std::string(flag) + ": '" + item + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void check_beta(std::size_t beta, std::size_t max_beta) {
  if (beta < 1) throw std::invalid_argument("--beta must be >= 1");
  if (beta > max_beta)
    throw std::invalid_argument("--beta " + std::to_string(beta) + " exceeds --max-beta " + std::to_string(max_beta));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw uds::DataError("cannot write '" + path + "'");
  out << content;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct ExperimentArgs {
  std::string f = "f1";
  std::size_t m = 4000;
  std::size_t n = 20;
  double sigma_rel = 0.1;
  std::size_t extra = 0;
  std::string extra_arm = "null";
  bool mixed = false;
  std::size_t min_dim = 2;
  std::size_t max_dim = 50;
  double alpha = 0.05;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  bool null_vs_null = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--f", a.f, "response function: f1|f2|f3|f4")->check(CLI::IsMember({"f1", "f2", "f3", "f4"}));
  cmd->add_option("--m", a.m, "records per dataset");
  cmd->add_option("--n", a.n, "dimensionality (even)");
  cmd->add_option("--sigma-rel", a.sigma_rel, "noise sd relative to sd(W_i)");
  cmd->add_option("--extra", a.extra, "extra independent dimensions");
  cmd->add_option("--extra-arm", a.extra_arm, "arm receiving the extra dimensions")
      ->check(CLI::IsMember({"null", "alt"}));
  cmd->add_flag("--mixed", a.mixed, "draw each dataset's dimensionality from [--min-dim, --max-dim]");
  cmd->add_option("--min-dim", a.min_dim, "mixed layout lower bound");
  cmd->add_option("--max-dim", a.max_dim, "mixed layout upper bound");
  cmd->add_option("--alpha", a.alpha, "significance level");
  cmd->add_option("--runs", a.runs, "datasets per arm");
  cmd->add_option("--seed", a.seed, "master seed")->required();
  cmd->add_flag("--null-vs-null", a.null_vs_null, "draw both arms from the null generator");
}

uds::PowerConfig power_config(const ExperimentArgs& a, unsigned threads) {
  if (a.n < 2 || a.n % 2) throw std::invalid_argument("--n must be even and >= 2");
  if (a.m < 2) throw std::invalid_argument("--m must be >= 2");
  if (a.runs < 1) throw std::invalid_argument("--runs must be >= 1");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1)");
  if (!(a.sigma_rel >= 0.0)) throw std::invalid_argument("--sigma-rel must be >= 0");
  if (a.mixed && a.extra) throw std::invalid_argument("--mixed and --extra are exclusive");
  if (a.mixed && (a.min_dim < 2 || a.min_dim > a.max_dim))
    throw std::invalid_argument("--min-dim/--max-dim must satisfy 2 <= min <= max");
  uds::PowerConfig c;
  c.gen.f = *uds::parse_response(a.f);
  c.gen.m = a.m;
  c.gen.n = a.n;
  c.gen.sigma_rel = a.sigma_rel;
  c.gen.extra = a.extra;
  c.gen.seed = a.seed;
  c.alpha = a.alpha;
  c.runs = a.runs;
  c.min_dim = a.min_dim;
  c.max_dim = a.max_dim;
  c.null_vs_null = a.null_vs_null;
  c.threads = threads;
  if (a.mixed)
    c.layout = uds::Layout::mixed;
  else if (a.extra)
    c.layout = a.extra_arm == "alt" ? uds::Layout::alt_extra : uds::Layout::null_extra;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal dependency scores for subspaces of real-valued data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", uds::kVersion);

  std::size_t beta = uds::kDefaultBeta;
  std::size_t max_beta = uds::kDefaultMaxBeta;
  unsigned threads = 0;
  bool timings = false;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--beta", beta, "initial equal-frequency bins per column");
    cmd->add_option("--max-beta", max_beta, "upper limit accepted for --beta");
    cmd->add_flag("--timings", timings, "include wall-clock times in reports");
  };
  auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  };

  // score
  auto* score = app.add_subcommand("score", "score one subspace; JSON on stdout");
  InputArgs score_in;
  std::string columns;
  bool exact = false;
  add_input_flags(score, score_in);
  score->add_option("--columns,-c", columns, "comma-separated column names")->required();
  score->add_flag("--exact", exact, "maximize over all permutations (at most 6 columns)");
  add_common(score);

  // search
  auto* search = app.add_subcommand("search", "beam search for correlated subspaces");
  InputArgs search_in;
  uds::SearchConfig search_cfg;
  double min_score = -1.0;
  std::string search_out = "uds_search";
  add_input_flags(search, search_in);
  search->add_option("--beam-width", search_cfg.beam_width, "candidates kept per level");
  auto* max_dim_opt = search->add_option("--max-dim", search_cfg.max_dim, "largest subspace size");
  search->add_option("--top-k", search_cfg.top_k, "number of subspaces reported");
  search->add_option("--min-score", min_score, "drop subspaces scoring below this");
  search->add_option("--out,-o", search_out, "output prefix for .json and .tsv");
  add_common(search);
  add_threads(search);

  // power
  auto* power = app.add_subcommand("power", "statistical power against independent data");
  ExperimentArgs power_args;
  std::string power_out = "uds_power";
  add_experiment_flags(power, power_args);
  power->add_option("--out,-o", power_out, "output prefix for .json and .tsv");
  add_common(power);
  add_threads(power);

  // beta
  auto* beta_cmd = app.add_subcommand("beta", "power across a grid of initial bin counts");
  ExperimentArgs beta_args;
  std::string betas = "5,10,15,20,25,30,35,40";
  std::string beta_out = "uds_beta";
  add_experiment_flags(beta_cmd, beta_args);
  beta_cmd->add_option("--betas", betas, "comma-separated beta grid");
  beta_cmd->add_option("--max-beta", max_beta, "upper limit accepted for grid values");
  beta_cmd->add_option("--out,-o", beta_out, "output prefix for .json and .tsv");
  beta_cmd->add_flag("--timings", timings, "include wall-clock times in reports");
  add_threads(beta_cmd);

  // bench
  auto* bench = app.add_subcommand("bench", "runtime of the practical score versus m and n");
  std::string bench_ms = "1000,2000,4000,8000";
  std::string bench_ns = "10,20";
  std::string bench_f = "f1";
  double bench_sigma = 0.1;
  std::size_t bench_reps = 3;
  std::uint64_t bench_seed = 0;
  std::string bench_out = "uds_bench";
  bench->add_option("--ms", bench_ms, "comma-separated record counts");
  bench->add_option("--ns", bench_ns, "comma-separated dimensionalities (even)");
  bench->add_option("--f", bench_f, "response function")->check(CLI::IsMember({"f1", "f2", "f3", "f4"}));
  bench->add_option("--sigma-rel", bench_sigma, "noise sd relative to sd(W_i)");
  bench->add_option("--reps", bench_reps, "repetitions per cell (median reported)");
  bench->add_option("--seed", bench_seed, "master seed")->required();
  bench->add_option("--beta", beta, "initial equal-frequency bins per column");
  bench->add_option("--out,-o", bench_out, "output prefix for .json and .tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (*score) {
      check_beta(beta, max_beta);
      const auto names = split_list(columns);
      if (names.size() < 2) throw std::invalid_argument("need >= 2 columns, got " + std::to_string(names.size()));
      const auto data = read_input(score_in);
      std::vector<std::size_t> dims;
      for (const auto& name : names) {
        const auto id = data.find(name);
        if (!id) throw std::invalid_argument("unknown column '" + name + "'");
        dims.push_back(*id);
      }
      uds::ScoreConfig sc{beta, max_beta};
      const auto result = exact ? uds::uds_exact(data, dims, sc) : uds::uds_pr(data, dims, sc);

      uds::RunManifest manifest;
      manifest.command = "score";
      manifest.parameters = {{"columns", names}, {"beta", beta}, {"exact", exact},
                             {"has_header", !score_in.no_header}, {"drop_na", score_in.drop_na}};
      manifest.input_checksums.emplace_back(score_in.path, uds::hex64(uds::file_checksum(score_in.path)));
      if (timings) manifest.wall_clock_seconds = seconds_since(t0);
      nlohmann::ordered_json out;
      out["manifest"] = uds::to_json(manifest);
      out["result"] = uds::to_json(result, data);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*search) {
      check_beta(beta, max_beta);
      const auto data = read_input(search_in);
      if (data.cols() < 2) throw std::invalid_argument("search needs >= 2 columns");
      if (max_dim_opt->count() == 0) search_cfg.max_dim = std::min(search_cfg.max_dim, data.cols());
      if (min_score >= 0.0) search_cfg.min_score = min_score;
      search_cfg.score = uds::ScoreConfig{beta, max_beta};
      search_cfg.threads = threads;
      const auto ranked = uds::beam_search(data, search_cfg);

      uds::RunManifest manifest;
      manifest.command = "search";
      manifest.parameters = {{"beam_width", search_cfg.beam_width}, {"max_dim", search_cfg.max_dim},
                             {"top_k", search_cfg.top_k}, {"beta", beta},
                             {"min_score", search_cfg.min_score ? nlohmann::json(*search_cfg.min_score) : nlohmann::json()}};
      manifest.input_checksums.emplace_back(search_in.path, uds::hex64(uds::file_checksum(search_in.path)));
      if (timings) manifest.wall_clock_seconds = seconds_since(t0);
      nlohmann::ordered_json report;
      report["manifest"] = uds::to_json(manifest);
      report["subspaces"] = uds::to_json(ranked, data);
      write_file(search_out + ".json", report.dump(2) + "\n");
      std::ostringstream tsv;
      uds::write_search_tsv(tsv, ranked, data);
      write_file(search_out + ".tsv", tsv.str());

      std::cout << "rank\tscore\tdims\n";
      for (std::size_t i = 0; i < ranked.size() && i < 10; ++i)
        std::cout << i + 1 << '\t' << ranked[i].score << '\t' << uds::join_names(data, ranked[i].dims) << '\n';
      std::cout << "wrote " << search_out << ".json, " << search_out << ".tsv\n";
      return 0;
    }

    if (*power) {
      check_beta(beta, max_beta);
      const auto cfg = power_config(power_args, threads);
      const auto report = uds::statistical_power(uds::uds_measure({beta, max_beta}), cfg);

      uds::RunManifest manifest;
      manifest.command = "power";
      manifest.seed = power_args.seed;
      manifest.parameters = uds::to_json(cfg);
      manifest.parameters["beta"] = beta;
      if (timings) manifest.wall_clock_seconds = seconds_since(t0);
      nlohmann::ordered_json out;
      out["manifest"] = uds::to_json(manifest);
      out["report"] = uds::to_json(report, timings);
      write_file(power_out + ".json", out.dump(2) + "\n");
      std::ostringstream tsv;
      uds::write_power_tsv(tsv, report);
      write_file(power_out + ".tsv", tsv.str());
      std::cout << "cutoff " << report.cutoff << "  power " << report.power << "  (" << cfg.runs
                << " runs per arm)\nwrote " << power_out << ".json, " << power_out << ".tsv\n";
      return 0;
    }

    if (*beta_cmd) {
      const auto grid = parse_sizes(betas, "--betas");
      if (grid.empty()) throw std::invalid_argument("--betas is empty");
      for (auto b : grid) check_beta(b, max_beta);
      const auto cfg = power_config(beta_args, threads);
      uds::ScoreConfig base;
      base.max_beta = max_beta;
      const auto sweep = uds::beta_sensitivity(cfg, grid, base);

      uds::RunManifest manifest;
      manifest.command = "beta";
      manifest.seed = beta_args.seed;
      manifest.parameters = uds::to_json(cfg);
      manifest.parameters["betas"] = grid;
      if (timings) manifest.wall_clock_seconds = seconds_since(t0);
      nlohmann::ordered_json out;
      out["manifest"] = uds::to_json(manifest);
      auto rows = nlohmann::ordered_json::array();
      std::ostringstream tsv;
      tsv << "beta\tarm\trun\tdims\tscore\n";
      for (const auto& bp : sweep) {
        nlohmann::ordered_json row;
        row["beta"] = bp.beta;
        row["below_stability_threshold"] = bp.below_stability_threshold;
        row["report"] = uds::to_json(bp.report, timings);
        rows.push_back(row);
        uds::write_power_tsv_rows(tsv, bp.report, std::to_string(bp.beta) + "\t");
      }
      out["sweep"] = rows;
      write_file(beta_out + ".json", out.dump(2) + "\n");
      write_file(beta_out + ".tsv", tsv.str());
      for (const auto& bp : sweep)
        std::cout << "beta " << bp.beta << "  power " << bp.report.power
                  << (bp.below_stability_threshold ? "  (beta <= 10: below the stable range)" : "") << '\n';
      std::cout << "wrote " << beta_out << ".json, " << beta_out << ".tsv\n";
      return 0;
    }

    if (*bench) {
      check_beta(beta, max_beta);
      const auto ms = parse_sizes(bench_ms, "--ms");
      const auto ns = parse_sizes(bench_ns, "--ns");
      for (auto n : ns)
        if (n % 2) throw std::invalid_argument("--ns values must be even");
      for (auto m : ms)
        if (m < 2) throw std::invalid_argument("--ms values must be >= 2");
      uds::BenchOptions opts;
      opts.f = *uds::parse_response(bench_f);
      opts.sigma_rel = bench_sigma;
      opts.reps = bench_reps;
      opts.score = uds::ScoreConfig{beta, max_beta};
      const auto rows = uds::runtime_bench(ms, ns, bench_seed, opts);

      uds::RunManifest manifest;
      manifest.command = "bench";
      manifest.seed = bench_seed;
      manifest.parameters = {{"ms", ms}, {"ns", ns}, {"f", bench_f}, {"sigma_rel", bench_sigma},
                             {"reps", bench_reps}, {"beta", beta}};
      manifest.wall_clock_seconds = seconds_since(t0);
      nlohmann::ordered_json out;
      out["manifest"] = uds::to_json(manifest);
      auto table = nlohmann::ordered_json::array();
      for (const auto& r : rows) table.push_back({{"m", r.m}, {"n", r.n}, {"seconds", r.seconds}});
      out["timings"] = table;
      write_file(bench_out + ".json", out.dump(2) + "\n");
      std::ostringstream tsv;
      uds::write_bench_tsv(tsv, rows);
      write_file(bench_out + ".tsv", tsv.str());
      std::cout << tsv.str() << "wrote " << bench_out << ".json, " << bench_out << ".tsv\n";
      return 0;
    }
  } catch (const uds::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
