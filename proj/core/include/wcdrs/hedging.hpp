#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wcdrs/convex_set.hpp"
#include "wcdrs/drs.hpp"
#include "wcdrs/functions.hpp"
#include "wcdrs/penalty.hpp"

namespace wcdrs {

struct Scenario {
  /// f_i over R^{scenario_dim}; constraints X_i folded in as indicators.
  ProxFn objective;
  double probability = 0.0;
};

/// min sum_i p_i f_i(x_i) s.t. x in N, in the geometry
/// <x, z> = sum_i p_i x_i^T z_i. N defaults to the one-stage consensus
/// subspace; multistage trees supply their own projector.
class ScenarioProblem {
 public:
  ScenarioProblem(std::vector<Scenario> scenarios, Index scenario_dim,
                  std::optional<double> mu = std::nullopt);
  /// `nonanticipativity` must be a linear set in the scenario geometry.
  ScenarioProblem(std::vector<Scenario> scenarios, Index scenario_dim,
                  ConvexSet nonanticipativity, double mu);

  std::size_t scenario_count() const noexcept { return scenarios_.size(); }
  Index scenario_dim() const noexcept { return dim_; }
  Index dimension() const noexcept {
    return dim_ * static_cast<Index>(scenarios_.size());
  }
  double mu() const noexcept { return mu_; }
  const std::vector<Scenario>& scenarios() const noexcept { return scenarios_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }
  const ConvexSet& subspace() const noexcept { return subspace_; }
  const Geometry& geometry() const noexcept { return subspace_.geometry(); }

  /// sum_i p_i f_i(x_i).
  double objective(const Vector& x) const;
  /// f(x) + (mu / 2) d_N^2(z).
  double penalized_objective(const Vector& x, const Vector& z) const;
  /// The aggregate f as a ProxFn in the weighted geometry: its prox is the
  /// per-scenario prox with the same gamma.
  ProxFn aggregate() const;
  /// Penalty-method view with C = N.
  PenalizedProblem as_penalized() const;
  /// (x0, ..., x0).
  Vector lift(const Vector& x0) const;

  /// x_i = prox_{gamma f_i}(center_i) for every scenario, in scenario order.
  /// Failures are rethrown as ScenarioError.
  Vector solve_scenarios(double gamma, const Vector& centers) const;

 private:
  std::vector<Scenario> scenarios_;
  Index dim_;
  std::vector<double> probs_;
  ConvexSet subspace_;
  double mu_;
};

struct PhState {
  Vector s;
  /// P_N(s).
  Vector s_n;
  Vector w;
  Vector z;
  /// Scenario subproblem solutions at (z, w).
  Vector x;
  int iter = 0;
};

struct PhOptions {
  /// Reject gamma outside (0, (2 - lambda) / (2 mu)). Benchmarks sweeping a
  /// fixed grid may disable this.
  bool enforce_step_bound = true;
};

/// s = z = z0 in N, w = 0, then the scenario subproblems. Throws
/// DimensionError when z0 is not in N.
PhState ph_start(const ScenarioProblem& problem, double gamma, const Vector& z0);

/// One pass: dual updates from x, primal update, then scenario subproblems.
PhState ph_step(const ScenarioProblem& problem, double gamma, double lambda,
                const PhState& state, const PhOptions& options = {});

/// The penalty method with C = N versus ph_step, comparing (z, x, s, w) every
/// iteration. Throws EquivalenceError beyond `tolerance`.
EquivalenceReport ph_equivalence_check(const ScenarioProblem& problem,
                                       double gamma, double lambda,
                                       const Vector& s0, int iters,
                                       double tolerance = 1e-12);

struct PhTraceRow {
  int iter = 0;
  /// f(x^k) + (mu / 2) d_N^2(z^k).
  double penalized_objective = 0.0;
  /// |x^k - P_N x^k| in the weighted norm.
  double consensus_gap = 0.0;
  double residual = 0.0;
  double dre = 0.0;
};

struct PhResult {
  PhState state;
  std::vector<PhTraceRow> trace;
  Termination termination = Termination::MaxIter;
  int iterations = 0;
};

/// Iterates ph_step until the stopping rule in `params`; the objective stop
/// compares penalized_objective with params.reference_value.
PhResult solve_ph(const ScenarioProblem& problem, const DrsParams& params,
                  const Vector& z0);

/// Columns: iter,penalized_objective,consensus_gap,residual,dre.
void write_ph_trace_csv(std::ostream& out, const std::vector<PhTraceRow>& trace);

/// Scenario instance file:
/// {
///   "probabilities": [p_1, ..., p_N],      // optional, default uniform
///   "scenario_dim": n,
///   "mu": 1.0,                             // optional, default sqrt(N)/2
///   "scenarios": [ {"type": "...", ...}, ... ]
/// }
/// Scenario objective types:
///   {"type": "zero"}
///   {"type": "quadratic", "center": [...], "curvature": 1.0}
///   {"type": "l1", "scale": 1.0}
///   {"type": "point", "point": [...]}
///   {"type": "phase", "a": [...], "b": 0.5}   // |<a, x>^2 - b|
ScenarioProblem scenario_problem_from_json(const std::string& text);
ScenarioProblem load_scenario_problem(const std::filesystem::path& path);

}  // namespace wcdrs
