#pragma once

#include "wcdrs/convex_set.hpp"
#include "wcdrs/drs.hpp"
#include "wcdrs/functions.hpp"

namespace wcdrs {

/// (mu / 2) d_C^2 in the set's geometry: gradient mu (x - P_C x), L = mu, and
/// prox s + (gamma mu / (1 + gamma mu)) (P_C s - s).
SmoothFn squared_distance_penalty(const ConvexSet& set, double mu);

/// sqrt(N) / 2 for consensus sets, 1 otherwise.
double default_penalty_scaling(const ConvexSet& set);

/// minimize f(x) + (mu / 2) d_C^2(x) as a surrogate for min_{x in C} f(x).
struct PenalizedProblem {
  ProxFn objective;
  ConvexSet set;
  double mu = 1.0;

  SmoothFn penalty() const { return squared_distance_penalty(set, mu); }
  /// phi1 = (mu/2) d_C^2, phi2 = f.
  SplitProblem split() const { return {penalty(), objective, set.geometry()}; }
  double penalized_value(const Vector& x) const {
    return objective.value(x) + 0.5 * mu * set.squared_distance(x);
  }
};

struct Alg1State {
  Vector s;
  /// s shrunk towards P_C(s).
  Vector z;
  /// mu (z - P_C z).
  Vector w;
  /// argmin f(x) + <w, x> + |x - z|^2 / (2 gamma).
  Vector x;
  int iter = 0;
};

/// Projection and subproblem steps at s0.
Alg1State alg1_start(const PenalizedProblem& problem, double gamma,
                     const Vector& s0);

/// s <- s + lambda (x - z), then projection and subproblem at the new s.
/// Requires lambda in (0, 2) and 0 < gamma < (2 - lambda) / (2 mu).
Alg1State alg1_step(const PenalizedProblem& problem, double gamma,
                    double lambda, const Alg1State& state);

struct EquivalenceReport {
  int iterations = 0;
  double max_deviation = 0.0;
  /// Per-iteration deviation, max over the compared pairs.
  std::vector<double> deviations;
};

/// max |a - b|_inf / max(1, |a|_inf, |b|_inf).
double relative_deviation(const Vector& a, const Vector& b);

/// Runs the generic engine on (phi1 = (mu/2) d_C^2, phi2 = f) and the penalty method
/// side by side from s0 and compares (u, z), (v, x), (s, s) every iteration.
/// Throws EquivalenceError at the first iteration whose deviation exceeds
/// `tolerance`.
EquivalenceReport equivalence_check(const PenalizedProblem& problem,
                                    double gamma, double lambda,
                                    const Vector& s0, int iters,
                                    double tolerance = 1e-12);

struct PenalizedResult {
  Alg1State state;
  /// x, or P_C(x) when projection was requested.
  Vector solution;
  Trace trace;
  Termination termination = Termination::MaxIter;
  int iterations = 0;
};

/// The penalty method under the stopping rules of DrsParams. The trace carries the
/// envelope of the induced split problem.
PenalizedResult solve_penalized(const PenalizedProblem& problem,
                                const DrsParams& params, const Vector& s0,
                                bool project_solution = false);

}  // namespace wcdrs
