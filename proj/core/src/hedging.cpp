#include "wcdrs/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wcdrs/error.hpp"

namespace wcdrs {

namespace {

std::vector<double> probabilities_of(const std::vector<Scenario>& scenarios) {
  std::vector<double> p;
  p.reserve(scenarios.size());
  for (const auto& sc : scenarios) p.push_back(sc.probability);
  validate_probabilities(p);
  return p;
}

}  // namespace

ScenarioProblem::ScenarioProblem(std::vector<Scenario> scenarios,
                                 Index scenario_dim, std::optional<double> mu)
    : scenarios_(std::move(scenarios)),
      dim_(scenario_dim),
      probs_(probabilities_of(scenarios_)),
      subspace_(ConvexSet::consensus(probs_, scenario_dim)),
      mu_(mu.value_or(default_penalty_scaling(subspace_))) {
  if (!(mu_ > 0.0)) throw StepsizeError("penalty scaling mu must be positive");
}

ScenarioProblem::ScenarioProblem(std::vector<Scenario> scenarios,
                                 Index scenario_dim, ConvexSet nonanticipativity,
                                 double mu)
    : scenarios_(std::move(scenarios)),
      dim_(scenario_dim),
      probs_(probabilities_of(scenarios_)),
      subspace_(std::move(nonanticipativity)),
      mu_(mu) {
  if (!subspace_.is_linear()) {
    throw DimensionError("nonanticipativity set must be a subspace");
  }
  if (!(mu_ > 0.0)) throw StepsizeError("penalty scaling mu must be positive");
}

double ScenarioProblem::objective(const Vector& x) const {
  if (x.size() != dimension()) throw DimensionError("scenario objective: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < scenarios_.size(); ++i) {
    const Vector xi = x.segment(static_cast<Index>(i) * dim_, dim_);
    total += probs_[i] * scenarios_[i].objective.value(xi);
  }
  return total;
}

double ScenarioProblem::penalized_objective(const Vector& x, const Vector& z) const {
  return objective(x) + 0.5 * mu_ * subspace_.squared_distance(z);
}

Vector ScenarioProblem::solve_scenarios(double gamma, const Vector& centers) const {
  if (centers.size() != dimension()) throw DimensionError("scenario centers: size mismatch");
  Vector x(centers.size());
  for (std::size_t i = 0; i < scenarios_.size(); ++i) {
    const Index off = static_cast<Index>(i) * dim_;
    try {
      const Vector xi = scenarios_[i].objective.prox(gamma, centers.segment(off, dim_));
      if (xi.size() != dim_) throw DimensionError("prox returned wrong dimension");
      x.segment(off, dim_) = xi;
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(i, e.what());
    }
  }
  return x;
}

ProxFn ScenarioProblem::aggregate() const {
  ProxFn f;
  // Copies keep the oracle valid independently of this object.
  const ScenarioProblem self = *this;
  f.value = [self](const Vector& x) { return self.objective(x); };
  f.prox = [self](double gamma, const Vector& v) { return self.solve_scenarios(gamma, v); };
  double rho = 0.0;
  for (const auto& sc : scenarios_) rho = std::max(rho, sc.objective.weak_convexity);
  f.weak_convexity = rho;
  return f;
}

PenalizedProblem ScenarioProblem::as_penalized() const {
  return {aggregate(), subspace_, mu_};
}

Vector ScenarioProblem::lift(const Vector& x0) const {
  if (x0.size() != dim_) throw DimensionError("lift: size mismatch");
  return x0.replicate(static_cast<Index>(scenarios_.size()), 1);
}

PhState ph_start(const ScenarioProblem& problem, double gamma, const Vector& z0) {
  if (!(gamma > 0.0)) throw StepsizeError("stepsize gamma must be positive");
  if (z0.size() != problem.dimension()) throw DimensionError("ph_start: size mismatch");
  const Vector pz = problem.subspace().project(z0);
  const double scale = std::max(1.0, z0.lpNorm<Eigen::Infinity>());
  if ((pz - z0).lpNorm<Eigen::Infinity>() > 1e-12 * scale) {
    throw DimensionError("ph_start: z0 must lie in the nonanticipativity subspace");
  }
  PhState st;
  st.s = z0;
  st.s_n = z0;
  st.z = z0;
  st.w = Vector::Zero(z0.size());
  st.x = problem.solve_scenarios(gamma, st.z);
  return st;
}

PhState ph_step(const ScenarioProblem& problem, double gamma, double lambda,
                const PhState& state, const PhOptions& options) {
  if (options.enforce_step_bound) {
    DrsParams p;
    p.gamma = gamma;
    p.lambda = lambda;
    validate(p, problem.mu());
  } else if (!(gamma > 0.0) || !(lambda > 0.0 && lambda < 2.0)) {
    throw StepsizeError("ph_step: need gamma > 0 and lambda in (0, 2)");
  }
  const double mu = problem.mu();
  const double theta = gamma * mu / (1.0 + gamma * mu);
  const double dual_scale = mu / (1.0 + gamma * mu);

  PhState next;
  next.iter = state.iter + 1;
  next.s = state.s + lambda * (state.x - state.z);
  next.s_n = problem.subspace().project(next.s);
  next.w = dual_scale * (next.s - next.s_n);
  next.z = next.s + theta * (next.s_n - next.s);
  next.x = problem.solve_scenarios(gamma, next.z - gamma * next.w);
  return next;
}

EquivalenceReport ph_equivalence_check(const ScenarioProblem& problem,
                                       double gamma, double lambda,
                                       const Vector& s0, int iters,
                                       double tolerance) {
  const PenalizedProblem penalized = problem.as_penalized();
  EquivalenceReport report;
  PhState ph = ph_start(problem, gamma, s0);
  Alg1State alg = alg1_start(penalized, gamma, s0);
  for (int k = 0; k < iters; ++k) {
    if (k > 0) {
      ph = ph_step(problem, gamma, lambda, ph);
      alg = alg1_step(penalized, gamma, lambda, alg);
    }
    const double dev = std::max({relative_deviation(ph.z, alg.z),
                                 relative_deviation(ph.x, alg.x),
                                 relative_deviation(ph.s, alg.s),
                                 relative_deviation(ph.w, alg.w)});
    report.deviations.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
    report.iterations = k + 1;
    if (!(dev <= tolerance)) throw EquivalenceError(k, dev);
  }
  return report;
}

PhResult solve_ph(const ScenarioProblem& problem, const DrsParams& params,
                  const Vector& z0) {
  validate(params, problem.mu());
  const Geometry& g = problem.geometry();
  const double gamma = params.gamma;
  const double mu = problem.mu();

  PhResult result{ph_start(problem, gamma, z0), {}, Termination::MaxIter, 0};
  PhState& st = result.state;
  auto make_row = [&](const PhState& s) {
    PhTraceRow row;
    row.iter = s.iter;
    const double f_x = problem.objective(s.x);
    const double dist_z = problem.subspace().squared_distance(s.z);
    row.penalized_objective = f_x + 0.5 * mu * dist_z;
    row.consensus_gap = problem.subspace().distance(s.x);
    const Vector s_next = s.s + params.lambda * (s.x - s.z);
    row.residual = residual(gamma, params.lambda, s.s, s_next, g);
    row.dre = 0.5 * mu * dist_z + f_x + g.dot(s.z - s.s, s.z - s.x) / gamma +
              g.squared_norm(s.z - s.x) / (2.0 * gamma);
    return row;
  };

  for (;;) {
    const PhTraceRow row = make_row(st);
    if (st.iter % params.trace_stride == 0) result.trace.push_back(row);
    result.iterations = st.iter + 1;
    if (row.residual <= params.tol_residual) {
      result.termination = Termination::Residual;
      break;
    }
    if (params.reference_value &&
        row.penalized_objective - *params.reference_value <= params.tol_objective) {
      result.termination = Termination::Objective;
      break;
    }
    if (result.iterations >= params.max_iter) {
      result.termination = Termination::MaxIter;
      break;
    }
    st = ph_step(problem, gamma, params.lambda, st);
  }
  if (result.trace.empty() || result.trace.back().iter != st.iter) {
    result.trace.push_back(make_row(st));
  }
  return result;
}

void write_ph_trace_csv(std::ostream& out, const std::vector<PhTraceRow>& trace) {
  out << "iter,penalized_objective,consensus_gap,residual,dre\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_double(r.penalized_objective) << ','
        << format_double(r.consensus_gap) << ',' << format_double(r.residual)
        << ',' << format_double(r.dre) << '\n';
  }
}

}  // namespace wcdrs
