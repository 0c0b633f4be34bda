#include "wcdrs/drs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wcdrs/error.hpp"

namespace wcdrs {

namespace {

constexpr double kProxIdentityTol = 1e-9;

double lagrangian_dre(const Geometry& g, double gamma, double phi1_u,
                      double phi2_v, const Vector& s, const Vector& u,
                      const Vector& v) {
  const Vector diff = u - v;
  return phi1_u + phi2_v + g.dot(u - s, diff) / gamma +
         g.squared_norm(diff) / (2.0 * gamma);
}

DrsState evaluate(const SplitProblem& problem, const DrsParams& params,
                  Vector s) {
  DrsState st;
  st.u = prox_smooth(problem.smooth, params.gamma, s);
  st.v = problem.nonsmooth.prox(params.gamma, 2.0 * st.u - s);
  st.s_next = s + params.lambda * (st.v - st.u);
  const double phi1_u = problem.smooth.value(st.u);
  const double phi2_v = problem.nonsmooth.value(st.v);
  st.objective = phi1_u + phi2_v;
  st.dre = lagrangian_dre(problem.geometry, params.gamma, phi1_u, phi2_v, s,
                          st.u, st.v);
  st.residual_norm = residual(params.gamma, params.lambda, s, st.s_next,
                              problem.geometry);
  st.s = std::move(s);
  return st;
}

TraceRow row_of(const SplitProblem& problem, const DrsState& st) {
  const Geometry& g = problem.geometry;
  return {st.iter,
          st.dre,
          st.objective,
          g.distance(st.u, st.v),
          g.distance(st.s_next, st.s),
          st.residual_norm};
}

}  // namespace

double descent_constant(double gamma, double lambda, double lipschitz) {
  return (2.0 - lambda) / (2.0 * lambda * gamma) - lipschitz / lambda;
}

void validate(const DrsParams& params, double lipschitz) {
  if (!(params.lambda > 0.0 && params.lambda < 2.0)) {
    throw StepsizeError("relaxation lambda must lie in (0, 2)");
  }
  if (!(params.gamma > 0.0)) throw StepsizeError("stepsize gamma must be positive");
  if (lipschitz > 0.0 &&
      !(params.gamma < (2.0 - params.lambda) / (2.0 * lipschitz))) {
    throw StepsizeError("stepsize gamma must be below (2 - lambda) / (2 L)");
  }
  if (params.max_iter < 1) throw StepsizeError("max_iter must be positive");
}

DrsState drs_start(const SplitProblem& problem, const DrsParams& params,
                   const Vector& s0) {
  validate(params, problem.smooth.lipschitz);
  return evaluate(problem, params, s0);
}

DrsState drs_step(const SplitProblem& problem, const DrsParams& params,
                  const DrsState& state) {
  DrsState next = evaluate(problem, params, state.s_next);
  next.iter = state.iter + 1;
  next.prev_dre = state.dre;
  next.nonmonotone = next.dre > state.dre + kMonotoneSlack;
  return next;
}

double dre_value(const SplitProblem& problem, double gamma, const Vector& s,
                 const Vector& u, const Vector& v, bool check_consistency) {
  if (check_consistency) {
    const Vector r = gamma * problem.smooth.gradient(u) + u - s;
    const double scale = std::max(1.0, s.lpNorm<Eigen::Infinity>());
    if (r.lpNorm<Eigen::Infinity>() > kProxIdentityTol * scale) {
      throw InconsistentStateError(
          "u is not prox_{gamma phi1}(s): optimality identity violated");
    }
  }
  return lagrangian_dre(problem.geometry, gamma, problem.smooth.value(u),
                        problem.nonsmooth.value(v), s, u, v);
}

double dre_value_model(const SplitProblem& problem, double gamma,
                       const Vector& u, const Vector& v) {
  const Geometry& g = problem.geometry;
  const Vector d = v - u;
  return problem.smooth.value(u) + g.dot(problem.smooth.gradient(u), d) +
         problem.nonsmooth.value(v) + g.squared_norm(d) / (2.0 * gamma);
}

double residual(double gamma, double lambda, const Vector& s,
                const Vector& s_next, const Geometry& geometry) {
  return std::sqrt(1.0 / (gamma * gamma) + 1.0) / lambda *
         geometry.distance(s_next, s);
}

double residual_assembled(double gamma, const Vector& u, const Vector& v,
                          const Geometry& geometry) {
  // Middle block of g is zero.
  return std::sqrt(1.0 / (gamma * gamma) + 1.0) * geometry.distance(u, v);
}

void check_invariants(const SplitProblem& problem, const DrsParams& params,
                      const DrsState& st, Diagnostics& diag) {
  const Geometry& g = problem.geometry;
  const double gamma = params.gamma;
  const double lip = problem.smooth.lipschitz;
  ++diag.checked;

  const double phi_u = problem.objective(st.u);
  const double phi_v = problem.objective(st.v);
  const double uv2 = g.squared_norm(st.u - st.v);
  const double upper = st.dre - phi_u;
  const double lower = phi_v - st.dre + (1.0 - gamma * lip) / (2.0 * gamma) * uv2;
  if (std::isfinite(upper)) diag.max_sandwich_upper = std::max(diag.max_sandwich_upper, upper);
  diag.max_sandwich_lower = std::max(diag.max_sandwich_lower, lower);

  const double formula = st.residual_norm;
  const double assembled = residual_assembled(gamma, st.u, st.v, g);
  const double gap = std::abs(formula - assembled);
  const double plain_scale = std::max(formula, assembled);
  if (plain_scale > 0.0) {
    diag.max_residual_identity_plain =
        std::max(diag.max_residual_identity_plain, gap / plain_scale);
  }
  const double operand_scale =
      std::sqrt(1.0 / (gamma * gamma) + 1.0) / params.lambda *
      std::max({g.norm(st.s_next - st.s), g.norm(st.s), g.norm(st.s_next)});
  if (operand_scale > 0.0) {
    diag.max_residual_identity = std::max(diag.max_residual_identity, gap / operand_scale);
  }

  const Vector grad = problem.smooth.gradient(st.u);
  const Vector d = st.v - st.u;
  const double phi1_u = problem.smooth.value(st.u);
  const double phi2_v = problem.nonsmooth.value(st.v);
  const double lin = g.dot(grad, d);
  const double quad = g.squared_norm(d) / (2.0 * gamma);
  const double model = phi1_u + lin + phi2_v + quad;
  const double terms = std::abs(phi1_u) + std::abs(lin) + std::abs(phi2_v) + quad;
  // Subnormal values round in absolute terms, so the scale stops at DBL_MIN.
  const double dre_scale = std::max(terms, std::numeric_limits<double>::min());
  diag.max_dre_mismatch = std::max(diag.max_dre_mismatch, std::abs(st.dre - model) / dre_scale);

  const Vector identity = gamma * grad + st.u - st.s;
  diag.max_prox_identity =
      std::max(diag.max_prox_identity, identity.lpNorm<Eigen::Infinity>());
  if (st.nonmonotone) ++diag.nonmonotone_count;
}

double descent_deficit(const SplitProblem& problem, const DrsParams& params,
                       const DrsState& current, const DrsState& next) {
  const Geometry& g = problem.geometry;
  const double lip = problem.smooth.lipschitz;
  const double c = descent_constant(params.gamma, params.lambda, lip);
  const double shrink = 1.0 + params.gamma * lip;
  const double bound =
      c * std::max(g.squared_norm(current.s - next.s) / (shrink * shrink),
                   g.squared_norm(current.u - next.u));
  return bound - (current.dre - next.dre);
}

DrsResult run(const SplitProblem& problem, const DrsParams& params,
              const Vector& s0) {
  DrsResult result{drs_start(problem, params, s0), Trace(params.trace_stride), {}, {}, 0};
  DrsState& state = result.state;
  for (;;) {
    result.trace.append(row_of(problem, state));
    if (params.verify) check_invariants(problem, params, state, result.diagnostics);
    result.iterations = state.iter + 1;

    if (state.residual_norm <= params.tol_residual) {
      result.termination = Termination::Residual;
      break;
    }
    if (params.reference_value &&
        state.objective - *params.reference_value <= params.tol_objective) {
      result.termination = Termination::Objective;
      break;
    }
    if (result.iterations >= params.max_iter) {
      result.termination = Termination::MaxIter;
      break;
    }

    DrsState next = drs_step(problem, params, state);
    const double deficit = descent_deficit(problem, params, state, next);
    result.diagnostics.max_descent_deficit =
        std::max(result.diagnostics.max_descent_deficit, deficit);
    if (deficit > kDescentSlack && params.stop_on_descent_violation) {
      throw DescentViolation(next.iter, deficit);
    }
    state = std::move(next);
  }
  result.trace.append_final(row_of(problem, state));
  return result;
}

LinearRate estimate_linear_rate(const Trace& trace, double reference_value,
                                int window) {
  LinearRate out;
  const auto& rows = trace.rows();
  if (rows.size() < 20 || window < 3) return out;

  const double zero = 1e-12 * std::max(1.0, std::abs(reference_value));
  std::size_t usable = 0;
  while (usable < rows.size() && rows[usable].dre - reference_value > zero) ++usable;
  if (usable < 3) return out;

  const std::size_t count = std::min<std::size_t>(usable, static_cast<std::size_t>(window));
  const std::size_t first = usable - count;
  double mx = 0.0, my = 0.0;
  for (std::size_t k = first; k < usable; ++k) {
    mx += rows[k].iter;
    my += std::log(rows[k].dre - reference_value);
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = first; k < usable; ++k) {
    const double dx = rows[k].iter - mx;
    const double dy = std::log(rows[k].dre - reference_value) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return out;
  const double slope = sxy / sxx;
  // A growing gap is not a rate; the reference value is too high.
  if (slope > 0.0) return out;
  out.q_factor = std::exp(slope);
  out.window = static_cast<int>(count);
  out.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  out.sublinear = *out.q_factor >= 0.99;
  return out;
}

}  // namespace wcdrs
