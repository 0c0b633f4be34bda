// wcdrs: benchmark sweeps, instance generation and scenario solves.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wcdrs/bench.hpp"
#include "wcdrs/error.hpp"
#include "wcdrs/hedging.hpp"
#include "wcdrs/phase_retrieval.hpp"

namespace fs = std::filesystem;
using namespace wcdrs;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::pair<int, int>> parse_sizes(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : split(text, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw FormatError("size '" + item + "' is not of the form NxN");
    out.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
  }
  return out;
}

// "1.0,1.5" or "lo:hi:count".
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw FormatError("grid must be lo:hi:count");
    return bench::linspace(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
  }
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(std::stod(item));
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  body(out);
}

struct BenchFlags {
  std::string config;
  std::string sizes;
  int starts = -1;
  int max_iter = -1;
  double target = -1.0;
  std::string lambda_grid;
  int gamma_count = -1;
  std::string methods;
  long long seed = -1;
  int threads = -1;
  int stepsize_count = -1;
  std::string mu;
  std::string out_dir = "bench-out";
  bool timing = false;
  bool quiet = false;
};

int cmd_bench(const BenchFlags& f) {
  bench::BenchConfig cfg;
  if (!f.config.empty()) cfg = bench::config_from_json(read_file(f.config));
  if (!f.sizes.empty()) cfg.sizes = parse_sizes(f.sizes);
  if (f.starts >= 0) cfg.num_starts = f.starts;
  if (f.max_iter >= 0) cfg.max_iter = f.max_iter;
  if (f.target >= 0) cfg.target_accuracy = f.target;
  if (!f.lambda_grid.empty()) cfg.lambda_grid = parse_grid(f.lambda_grid);
  if (f.gamma_count >= 0) cfg.gamma_rule.count = f.gamma_count;
  if (!f.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : split(f.methods, ',')) cfg.methods.push_back(bench::method_from_string(m));
  }
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.threads >= 0) cfg.threads = f.threads;
  if (f.stepsize_count >= 0) cfg.stepsize_count = f.stepsize_count;
  if (!f.mu.empty()) {
    if (f.mu == "sqrt(N)/2") {
      cfg.mu_fixed.reset();
    } else {
      cfg.mu_fixed = std::stod(f.mu);
    }
  }

  if (!f.quiet) std::cerr << "running " << bench::planned_runs(cfg) << " runs\n";
  const auto records = bench::run_benchmark(cfg);

  const fs::path out(f.out_dir);
  fs::create_directories(out);
  write_file(out / "runs.csv", [&](std::ostream& o) { bench::write_runs_csv(o, records, f.timing); });
  write_file(out / "tables.csv",
             [&](std::ostream& o) { bench::write_tables_csv(o, records, cfg.table_thresholds); });
  const auto profile = bench::performance_profile(records, bench::default_profile_thresholds());
  write_file(out / "profile.csv", [&](std::ostream& o) { bench::write_profile_csv(o, profile); });

  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(bench::config_to_json(cfg));
  meta["runs"] = records.size();
  meta["accuracy"] = {
      {"DR", "running minimum of the objective at the consensus projection of x^k"},
      {"PD", "running minimum of the objective at z^{k+1} = P_N(x_hat^k)"},
      {"SPL", "running minimum of the objective after each shuffled epoch"}};
  meta["stepsize_aggregation"] =
      "SPL and PD record one run per constant stepsize; profiles and tables pool all runs, as for the DR grid";
  meta["inadmissible_gamma"] =
      "DR grid points with gamma >= (2 - lambda)/(2 mu) are run and flagged admissible=0";
  write_file(out / "metadata.json", [&](std::ostream& o) { o << meta.dump(2) << '\n'; });

  if (!f.quiet) {
    std::ifstream t(out / "tables.csv");
    std::cout << t.rdbuf();
  }
  return 0;
}

int cmd_generate(int rows, int cols, long long seed, const std::string& out) {
  const auto inst = phase::generate_instance(rows, cols, static_cast<std::uint64_t>(seed));
  if (out.empty() || out == "-") {
    std::cout << phase::to_json(inst) << '\n';
  } else {
    phase::save_instance(inst, out);
  }
  return 0;
}

struct SolveFlags {
  std::string instance;
  double gamma = 0.0;
  double lambda = 1.0;
  int max_iter = 1000;
  double tol = 1e-10;
  std::string x0;
  long long seed = 0;
  std::string out;
};

int cmd_solve_ph(const SolveFlags& f) {
  const std::string text = read_file(f.instance);
  const auto parsed = nlohmann::json::parse(text);
  const bool phase_file = parsed.contains("A");
  const ScenarioProblem problem = phase_file
                                      ? phase::to_scenario_problem(phase::instance_from_json(text))
                                      : scenario_problem_from_json(text);
  const Index n = problem.scenario_dim();

  Vector x0(n);
  if (!f.x0.empty()) {
    const auto parts = split(f.x0, ',');
    if (static_cast<Index>(parts.size()) != n) throw DimensionError("--x0 has the wrong length");
    for (Index j = 0; j < n; ++j) x0(j) = std::stod(parts[static_cast<std::size_t>(j)]);
  } else {
    std::mt19937_64 rng(static_cast<std::uint64_t>(f.seed));
    std::normal_distribution<double> normal;
    for (Index j = 0; j < n; ++j) x0(j) = normal(rng);
    x0 /= x0.norm();
  }

  DrsParams params;
  params.lambda = f.lambda;
  params.gamma = f.gamma > 0 ? f.gamma : 0.99 * (2.0 - f.lambda) / (2.0 * problem.mu());
  params.max_iter = f.max_iter;
  params.tol_residual = f.tol;
  const auto result = solve_ph(problem, params, problem.lift(x0));

  if (f.out.empty() || f.out == "-") {
    write_ph_trace_csv(std::cout, result.trace);
  } else {
    write_file(f.out, [&](std::ostream& o) { write_ph_trace_csv(o, result.trace); });
  }
  const Vector consensus = result.state.x.head(n);
  std::fprintf(stderr, "iterations %d, objective %.6e, gamma %.6g, mu %.6g\n", result.iterations,
               problem.objective(problem.lift(consensus)), params.gamma, problem.mu());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Douglas-Rachford splitting for weakly convex problems"};
  app.require_subcommand(1);

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "phase retrieval benchmark sweep");
  bench_cmd->add_option("--config", bf.config, "JSON config file");
  bench_cmd->add_option("--sizes", bf.sizes, "comma separated NxN pairs, e.g. 30x10,150x50");
  bench_cmd->add_option("--starts", bf.starts, "random starts per size");
  bench_cmd->add_option("--max-iter", bf.max_iter, "iterations per run");
  bench_cmd->add_option("--target", bf.target, "stop once this accuracy is reached");
  bench_cmd->add_option("--lambda-grid", bf.lambda_grid, "comma list or lo:hi:count");
  bench_cmd->add_option("--gamma-count", bf.gamma_count, "gammas per lambda");
  bench_cmd->add_option("--methods", bf.methods, "subset of DR,SPL,PD");
  bench_cmd->add_option("--seed", bf.seed, "master seed");
  bench_cmd->add_option("--threads", bf.threads, "worker threads, 0 = all cores");
  bench_cmd->add_option("--stepsize-count", bf.stepsize_count, "SPL/PD stepsizes");
  bench_cmd->add_option("--mu", bf.mu, "penalty scaling, number or sqrt(N)/2");
  bench_cmd->add_option("--out-dir", bf.out_dir, "output directory");
  bench_cmd->add_flag("--timing", bf.timing, "add wall_seconds to runs.csv");
  bench_cmd->add_flag("--quiet", bf.quiet, "no console output");

  int gen_rows = 30, gen_cols = 10;
  long long gen_seed = 0;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "write a phase retrieval instance as JSON");
  gen_cmd->add_option("--rows", gen_rows, "N");
  gen_cmd->add_option("--cols", gen_cols, "n");
  gen_cmd->add_option("--seed", gen_seed, "seed");
  gen_cmd->add_option("-o,--out", gen_out, "output file, default stdout");

  SolveFlags sf;
  auto* solve_cmd = app.add_subcommand("solve-ph", "progressive hedging on a scenario or instance file");
  solve_cmd->add_option("instance", sf.instance, "scenario or phase retrieval JSON")->required();
  solve_cmd->add_option("--gamma", sf.gamma, "stepsize, default 0.99 (2 - lambda)/(2 mu)");
  solve_cmd->add_option("--lambda", sf.lambda, "relaxation");
  solve_cmd->add_option("--max-iter", sf.max_iter, "iterations");
  solve_cmd->add_option("--tol", sf.tol, "residual tolerance");
  solve_cmd->add_option("--x0", sf.x0, "comma separated start, default random unit vector");
  solve_cmd->add_option("--seed", sf.seed, "seed of the random start");
  solve_cmd->add_option("-o,--out", sf.out, "trace CSV, default stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench_cmd) return cmd_bench(bf);
    if (*gen_cmd) return cmd_generate(gen_rows, gen_cols, gen_seed, gen_out);
    if (*solve_cmd) return cmd_solve_ph(sf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
