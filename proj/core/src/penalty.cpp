#include "wcdrs/penalty.hpp"

#include <algorithm>
#include <cmath>

#include "wcdrs/error.hpp"

namespace wcdrs {

namespace {

void shrink_and_solve(const PenalizedProblem& problem, double gamma,
                      Alg1State& st) {
  const double mu = problem.mu;
  const double theta = gamma * mu / (1.0 + gamma * mu);
  st.z = st.s + theta * (problem.set.project(st.s) - st.s);
  st.w = mu * (st.z - problem.set.project(st.z));
  // f(x) + <w, x> + |x - z|^2/(2 gamma) = f(x) + |x - (z - gamma w)|^2/(2 gamma) + const.
  st.x = problem.objective.prox(gamma, st.z - gamma * st.w);
}

void check_steps(const PenalizedProblem& problem, double gamma, double lambda) {
  DrsParams p;
  p.gamma = gamma;
  p.lambda = lambda;
  validate(p, problem.mu);
}

}  // namespace

SmoothFn squared_distance_penalty(const ConvexSet& set, double mu) {
  if (!(mu > 0.0)) throw StepsizeError("penalty scaling mu must be positive");
  SmoothFn f;
  f.value = [set, mu](const Vector& x) { return 0.5 * mu * set.squared_distance(x); };
  f.gradient = [set, mu](const Vector& x) -> Vector { return mu * (x - set.project(x)); };
  f.lipschitz = mu;
  f.prox = [set, mu](double gamma, const Vector& s) -> Vector {
    const double theta = gamma * mu / (1.0 + gamma * mu);
    return s + theta * (set.project(s) - s);
  };
  return f;
}

double default_penalty_scaling(const ConvexSet& set) {
  if (set.kind() == ConvexSet::Kind::Consensus) {
    return std::sqrt(static_cast<double>(set.probabilities().size())) / 2.0;
  }
  return 1.0;
}

Alg1State alg1_start(const PenalizedProblem& problem, double gamma,
                     const Vector& s0) {
  if (!(gamma > 0.0)) throw StepsizeError("stepsize gamma must be positive");
  Alg1State st;
  st.s = s0;
  shrink_and_solve(problem, gamma, st);
  return st;
}

Alg1State alg1_step(const PenalizedProblem& problem, double gamma,
                    double lambda, const Alg1State& state) {
  check_steps(problem, gamma, lambda);
  Alg1State next;
  next.s = state.s + lambda * (state.x - state.z);
  next.iter = state.iter + 1;
  shrink_and_solve(problem, gamma, next);
  return next;
}

double relative_deviation(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("relative_deviation: size mismatch");
  if (a.size() == 0) return 0.0;
  const double scale = std::max({1.0, a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()});
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

EquivalenceReport equivalence_check(const PenalizedProblem& problem,
                                    double gamma, double lambda,
                                    const Vector& s0, int iters,
                                    double tolerance) {
  check_steps(problem, gamma, lambda);
  const SplitProblem split = problem.split();
  DrsParams params;
  params.gamma = gamma;
  params.lambda = lambda;

  EquivalenceReport report;
  DrsState drs = drs_start(split, params, s0);
  Alg1State alg = alg1_start(problem, gamma, s0);
  for (int k = 0; k < iters; ++k) {
    if (k > 0) {
      drs = drs_step(split, params, drs);
      alg = alg1_step(problem, gamma, lambda, alg);
    }
    const double dev = std::max({relative_deviation(drs.u, alg.z),
                                 relative_deviation(drs.v, alg.x),
                                 relative_deviation(drs.s, alg.s)});
    report.deviations.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
    report.iterations = k + 1;
    if (!(dev <= tolerance)) throw EquivalenceError(k, dev);
  }
  return report;
}

PenalizedResult solve_penalized(const PenalizedProblem& problem,
                                const DrsParams& params, const Vector& s0,
                                bool project_solution) {
  validate(params, problem.mu);
  const SplitProblem split = problem.split();
  const Geometry& g = problem.set.geometry();
  const double gamma = params.gamma;

  PenalizedResult result{alg1_start(problem, gamma, s0), {}, Trace(params.trace_stride), {}, 0};
  Alg1State& st = result.state;
  auto make_row = [&](const Alg1State& a) {
    const Vector s_next = a.s + params.lambda * (a.x - a.z);
    TraceRow row;
    row.iter = a.iter;
    const double phi1 = split.smooth.value(a.z);
    const double phi2 = split.nonsmooth.value(a.x);
    row.objective = phi1 + phi2;
    row.dre = phi1 + phi2 + g.dot(a.z - a.s, a.z - a.x) / gamma +
              g.squared_norm(a.z - a.x) / (2.0 * gamma);
    row.norm_u_minus_v = g.distance(a.z, a.x);
    row.norm_s_step = g.distance(s_next, a.s);
    row.residual = residual(gamma, params.lambda, a.s, s_next, g);
    return row;
  };

  for (;;) {
    const TraceRow row = make_row(st);
    result.trace.append(row);
    result.iterations = st.iter + 1;
    if (row.residual <= params.tol_residual) {
      result.termination = Termination::Residual;
      break;
    }
    if (params.reference_value &&
        row.objective - *params.reference_value <= params.tol_objective) {
      result.termination = Termination::Objective;
      break;
    }
    if (result.iterations >= params.max_iter) {
      result.termination = Termination::MaxIter;
      break;
    }
    st = alg1_step(problem, gamma, params.lambda, st);
  }
  result.trace.append_final(make_row(st));
  result.solution = project_solution ? problem.set.project(st.x) : st.x;
  return result;
}

}  // namespace wcdrs
