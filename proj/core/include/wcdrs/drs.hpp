#pragma once

#include <optional>

#include "wcdrs/functions.hpp"
#include "wcdrs/geometry.hpp"
#include "wcdrs/trace.hpp"
#include "wcdrs/types.hpp"

namespace wcdrs {

/// minimize phi1(x) + phi2(x) with phi1 L-smooth and phi2 prox-friendly, in
/// the given geometry.
struct SplitProblem {
  SmoothFn smooth;
  ProxFn nonsmooth;
  Geometry geometry;

  double objective(const Vector& x) const {
    return smooth.value(x) + nonsmooth.value(x);
  }
};

struct DrsParams {
  double gamma = 0.0;
  /// Relaxation in (0, 2); 1 is classic DRS.
  double lambda = 1.0;
  int max_iter = 1000;
  /// Objective accuracy stop; only active with a reference value.
  double tol_objective = 0.0;
  double tol_residual = 1e-10;
  std::optional<double> reference_value;
  /// Record every k-th iterate in the trace.
  int trace_stride = 1;
  /// Cross-check the envelope and residual identities at every iterate.
  bool verify = false;
  /// Throw DescentViolation when sufficient decrease fails beyond the slack.
  bool stop_on_descent_violation = true;
};

/// Absolute slack on the sufficient-decrease test.
inline constexpr double kDescentSlack = 1e-9;
/// Absolute slack on both sandwich inequalities.
inline constexpr double kSandwichSlack = 1e-8;
/// Slack on DRE monotonicity before a state is flagged nonmonotone.
inline constexpr double kMonotoneSlack = 1e-10;

/// c = (2 - lambda) / (2 lambda gamma) - L / lambda.
double descent_constant(double gamma, double lambda, double lipschitz);

/// Throws StepsizeError unless lambda in (0, 2) and
/// 0 < gamma < (2 - lambda) / (2 L).
void validate(const DrsParams& params, double lipschitz);

/// One iterate (s^k, u^k, v^k) with u = prox_{gamma phi1}(s) and
/// v in prox_{gamma phi2}(2u - s). `s_next` is s + lambda (v - u).
struct DrsState {
  Vector s;
  Vector u;
  Vector v;
  Vector s_next;
  int iter = 0;
  double dre = 0.0;
  /// phi1(u) + phi2(v).
  double objective = 0.0;
  double residual_norm = 0.0;
  std::optional<double> prev_dre;
  bool nonmonotone = false;
};

/// Evaluates u, v and the envelope at s0.
DrsState drs_start(const SplitProblem& problem, const DrsParams& params,
                   const Vector& s0);

/// Advances to s^{k+1} = s^k + lambda (v^k - u^k) and evaluates the new
/// iterate.
DrsState drs_step(const SplitProblem& problem, const DrsParams& params,
                  const DrsState& state);

/// Envelope value in augmented-Lagrangian form
///   phi1(u) + phi2(v) + <(u - s)/gamma, u - v> + |u - v|^2 / (2 gamma).
/// With `check_consistency` it first verifies 0 = gamma grad phi1(u) + u - s
/// and throws InconsistentStateError when the identity fails beyond 1e-9.
double dre_value(const SplitProblem& problem, double gamma, const Vector& s,
                 const Vector& u, const Vector& v,
                 bool check_consistency = false);

/// Envelope value in first-order-model form
///   phi1(u) + <grad phi1(u), v - u> + phi2(v) + |v - u|^2 / (2 gamma).
double dre_value_model(const SplitProblem& problem, double gamma,
                       const Vector& u, const Vector& v);

/// |g^k| = lambda^{-1} sqrt(gamma^{-2} + 1) |s_next - s|.
double residual(double gamma, double lambda, const Vector& s,
                const Vector& s_next, const Geometry& geometry = {});

/// Norm of g^k = (gamma^{-1}(u - v), 0, u - v), the Lagrangian subgradient.
double residual_assembled(double gamma, const Vector& u, const Vector& v,
                          const Geometry& geometry = {});

/// Worst-case values of the runtime invariants over a run. Deficits are
/// (required - observed), so a value <= slack means the invariant held.
struct Diagnostics {
  int checked = 0;
  double max_descent_deficit = 0.0;
  double max_sandwich_upper = 0.0;  // dre - phi(u)
  double max_sandwich_lower = 0.0;  // phi(v) - dre + (1-gamma L)/(2 gamma)|u-v|^2
  /// |formula - assembled| relative to the operands of s_next - s.
  double max_residual_identity = 0.0;
  /// Same, relative to max(formula, assembled) only.
  double max_residual_identity_plain = 0.0;
  /// |Lagrangian form - model form| relative to the summands' magnitude.
  double max_dre_mismatch = 0.0;
  /// |gamma grad phi1(u) + u - s|.
  double max_prox_identity = 0.0;
  int nonmonotone_count = 0;
};

enum class Termination { Residual, Objective, MaxIter };

struct DrsResult {
  DrsState state;
  Trace trace;
  Diagnostics diagnostics;
  Termination termination = Termination::MaxIter;
  /// Number of evaluated iterates.
  int iterations = 0;
};

/// Iterates drs_step until residual <= tol_residual, objective accuracy
/// <= tol_objective (with a reference value) or max_iter iterates.
DrsResult run(const SplitProblem& problem, const DrsParams& params,
              const Vector& s0);

/// Scores one iterate against the invariants; used by run() in verify mode
/// and by the specialised algorithms.
void check_invariants(const SplitProblem& problem, const DrsParams& params,
                      const DrsState& state, Diagnostics& diagnostics);

/// Sufficient-decrease deficit between consecutive iterates.
double descent_deficit(const SplitProblem& problem, const DrsParams& params,
                       const DrsState& current, const DrsState& next);

struct LinearRate {
  /// exp(slope) of the least-squares fit of log(dre_k - reference).
  std::optional<double> q_factor;
  int window = 0;
  double r_squared = 0.0;
  /// q_factor >= 0.99.
  bool sublinear = false;
};

/// Fits log(dre_k - reference) over the last `window` trace rows preceding
/// the first numerically-zero gap. Returns no factor for traces shorter
/// than 20 rows, with fewer than 3 usable points, or with a growing gap.
LinearRate estimate_linear_rate(const Trace& trace, double reference_value,
                                int window = 100);

}  // namespace wcdrs
