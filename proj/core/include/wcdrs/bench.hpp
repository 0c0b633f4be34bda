#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcdrs/phase_retrieval.hpp"

namespace wcdrs::bench {

/// DR: nonconvex progressive hedging on the consensus
/// reformulation. SPL: stochastic prox-linear on the original problem.
/// PD: progressive decoupling with elicitation 0.
enum class Method { DR, SPL, PD };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Five equidistant gammas from `lo` to hi_fraction * (2 - lambda) / (2 mu).
/// With count == 1 the single value is hi_fraction * (2 - lambda) / (2 mu).
struct GammaRule {
  int count = 5;
  double lo = 0.01;
  double hi_fraction = 0.99;
};

struct BenchConfig {
  std::vector<std::pair<int, int>> sizes{{30, 10}, {150, 50}, {300, 100}};
  int num_starts = 15;
  int max_iter = 5000;
  double target_accuracy = 1e-6;
  /// "sqrt(N)/2" or a fixed positive number.
  std::optional<double> mu_fixed;
  std::vector<double> lambda_grid = default_lambda_grid();
  GammaRule gamma_rule;
  /// Constant stepsizes for SPL and PD, equally spaced inside (lo, hi).
  int stepsize_count = 100;
  double stepsize_lo = 1e-4;
  double stepsize_hi = 1.0;
  std::vector<Method> methods{Method::DR, Method::SPL, Method::PD};
  std::uint64_t seed = 0;
  /// 0 = hardware concurrency.
  int threads = 0;
  std::vector<double> table_thresholds{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

  /// 20 values equally spaced in [0.05, 1.95].
  static std::vector<double> default_lambda_grid();
  double mu_for(int rows) const;
};

/// Config file: every BenchConfig field is optional.
/// {"sizes": [[30,10]], "starts": 15, "max_iter": 5000, "target": 1e-6,
///  "mu": "sqrt(N)/2" | number, "lambda_grid": [..] | {"count","lo","hi"},
///  "gamma": {"count","lo","hi_fraction"}, "stepsizes": {"count","lo","hi"},
///  "methods": ["DR","SPL","PD"], "seed": 0, "threads": 0,
///  "thresholds": [..]}
BenchConfig config_from_json(const std::string& text);
std::string config_to_json(const BenchConfig& config);

/// `count` points equally spaced on [lo, hi] (count == 1 gives lo).
std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> gamma_grid(const GammaRule& rule, double lambda, double mu);
/// `count` points equally spaced strictly inside (lo, hi).
std::vector<double> open_grid(double lo, double hi, int count);

struct RunRecord {
  Method method = Method::DR;
  int rows = 0;
  int cols = 0;
  int start = 0;
  /// Only meaningful for DR.
  double lambda = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  /// gamma < (2 - lambda) / (2 mu); always true for SPL and PD.
  bool admissible = true;
  /// Running minimum of objective - 0 over the iterations.
  double best_accuracy = 0.0;
  /// DR only: running minimum of f(z^k) + (mu / 2) d_N^2(x^k), the penalized
  /// quantity some authors report instead of the consensus objective.
  double best_penalized = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  /// Empty on success, otherwise the error message.
  std::string error;
};

/// Shared by the runners.
struct RunSettings {
  int max_iter = 5000;
  double target_accuracy = 1e-6;
  /// Optional per-iteration callback receiving the running best accuracy.
  std::function<void(int, double)> on_iteration;
};

/// Progressive hedging from z0 = (x0, ..., x0), tracking the objective at P_N(x^k).
RunRecord run_dr(const phase::Instance& inst, const Vector& x0, double lambda,
                 double gamma, double mu, const RunSettings& settings);
/// One iteration is one epoch: a pass over all rows in a shuffled order.
RunRecord run_spl(const phase::Instance& inst, const Vector& x0, double gamma,
                  std::uint64_t shuffle_seed, const RunSettings& settings);
RunRecord run_pd(const phase::Instance& inst, const Vector& x0, double gamma,
                 const RunSettings& settings);

/// Instance and start point for one (size, start) problem.
phase::Instance problem_instance(const BenchConfig& config, int rows, int cols,
                                 int start);
Vector start_point(const BenchConfig& config, int rows, int cols, int start);

/// Every (size, start, method, parameter) run, sorted by
/// (method, N, n, start, lambda, gamma).
std::vector<RunRecord> run_benchmark(const BenchConfig& config);

/// Number of runs run_benchmark(config) will execute.
std::size_t planned_runs(const BenchConfig& config);

/// Percentage of records with best_accuracy < threshold, per threshold.
std::vector<double> accuracy_table(const std::vector<RunRecord>& records,
                                   const std::vector<double>& thresholds);

struct Profile {
  std::vector<double> thresholds;
  std::vector<Method> methods;
  /// fractions[m][t]: share of method m's runs with best_accuracy <= t.
  std::vector<std::vector<double>> fractions;
};

/// Default thresholds: 10^(-12 + k/4), k = 0..48.
std::vector<double> default_profile_thresholds();
Profile performance_profile(const std::vector<RunRecord>& records,
                            const std::vector<double>& thresholds);

/// Columns: method,N,n,start,lambda,gamma,mu,admissible,best_accuracy,
/// best_penalized,iterations,error[,wall_seconds].
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records,
                    bool with_timing = false);
/// One row per method and per (method, size); percentages with 3 decimals.
void write_tables_csv(std::ostream& out, const std::vector<RunRecord>& records,
                      const std::vector<double>& thresholds);
void write_profile_csv(std::ostream& out, const Profile& profile);

}  // namespace wcdrs::bench
