#include "wcdrs/phase_retrieval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "wcdrs/error.hpp"

namespace wcdrs::phase {

namespace {

constexpr double kSingularDenominator = 1e-12;

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * y[j];
  return acc;
}

/// Best multiple beta of a to add to the prox center, by the four
/// critical-point candidates. `center_a` = <center, a>.
double best_step(double center_a, double a_sq, double b, double gamma) {
  const double kappa = 2.0 * gamma * a_sq;
  const double root = std::sqrt(b);
  std::array<double, 4> beta{};
  std::array<bool, 4> valid{true, true, true, true};
  // Smooth branches <a,x>^2 > b and <a,x>^2 < b.
  beta[0] = -2.0 * gamma * center_a / (kappa + 1.0);
  if (std::abs(kappa - 1.0) < kSingularDenominator) {
    valid[1] = false;
  } else {
    beta[1] = -2.0 * gamma * center_a / (kappa - 1.0);
  }
  // Kinks <a,x> = +-sqrt(b): projection of the center onto the hyperplanes.
  beta[2] = (root - center_a) / a_sq;
  beta[3] = (-root - center_a) / a_sq;

  // Along x = center + beta a the objective is, up to a constant,
  // |(<center,a> + beta |a|^2)^2 - b| + beta^2 |a|^2 / (2 gamma).
  double best = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < beta.size(); ++k) {
    if (!valid[k]) continue;
    const double t = center_a + beta[k] * a_sq;
    const double value = std::abs(t * t - b) + beta[k] * beta[k] * a_sq / (2.0 * gamma);
    if (value < best_value) {
      best_value = value;
      best = beta[k];
    }
  }
  return best;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Instance generate_instance(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw DimensionError("instance needs N >= 1 and n >= 1");
  std::mt19937_64 rng(splitmix(seed));
  std::normal_distribution<double> normal(0.0, 1.0);

  Instance inst;
  inst.seed = seed;
  inst.A.resize(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    do {
      for (Index j = 0; j < cols; ++j) inst.A(i, j) = normal(rng);
    } while (inst.A.row(i).squaredNorm() == 0.0);
  }
  inst.x_target.resize(cols);
  do {
    for (Index j = 0; j < cols; ++j) inst.x_target(j) = normal(rng);
  } while (inst.x_target.norm() == 0.0);
  inst.x_target /= inst.x_target.norm();
  inst.b = (inst.A * inst.x_target).array().square();
  return inst;
}

double objective(const Instance& inst, const Vector& x) {
  if (x.size() != inst.cols()) throw DimensionError("objective: size mismatch");
  const Vector ax = inst.A * x;
  return (ax.array().square() - inst.b.array()).abs().sum() /
         static_cast<double>(inst.rows());
}

std::string to_json(const Instance& inst) {
  nlohmann::json j;
  j["seed"] = inst.seed;
  j["N"] = inst.rows();
  j["n"] = inst.cols();
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(inst.A.size()));
  for (Index i = 0; i < inst.rows(); ++i) {
    for (Index k = 0; k < inst.cols(); ++k) a.push_back(inst.A(i, k));
  }
  j["A"] = a;
  j["b"] = std::vector<double>(inst.b.data(), inst.b.data() + inst.b.size());
  j["x_target"] = std::vector<double>(inst.x_target.data(),
                                      inst.x_target.data() + inst.x_target.size());
  return j.dump();
}

Instance instance_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Instance inst;
    inst.seed = j.at("seed").get<std::uint64_t>();
    const auto rows = j.at("N").get<Index>();
    const auto cols = j.at("n").get<Index>();
    const auto a = j.at("A").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    const auto xt = j.at("x_target").get<std::vector<double>>();
    if (rows < 1 || cols < 1 || static_cast<Index>(a.size()) != rows * cols ||
        static_cast<Index>(b.size()) != rows ||
        static_cast<Index>(xt.size()) != cols) {
      throw FormatError("instance: inconsistent dimensions");
    }
    inst.A.resize(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < cols; ++k) {
        inst.A(i, k) = a[static_cast<std::size_t>(i * cols + k)];
      }
    }
    inst.b = Eigen::Map<const Vector>(b.data(), rows);
    inst.x_target = Eigen::Map<const Vector>(xt.data(), cols);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance: ") + e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << to_json(inst) << '\n';
}

double subproblem_objective(const SubproblemInput& inp, const Vector& x) {
  const double t = inp.a.dot(x);
  return std::abs(t * t - inp.b) + inp.w.dot(x) +
         (x - inp.z).squaredNorm() / (2.0 * inp.gamma);
}

void prox_phase_term(std::span<const double> a, double a_sq, double b,
                     double gamma, std::span<const double> center,
                     std::span<double> out) {
  const double beta = best_step(dot(center, a), a_sq, b, gamma);
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = center[j] + beta * a[j];
}

Vector solve_subproblem_closed_form(const SubproblemInput& inp) {
  const Index n = inp.a.size();
  if (inp.z.size() != n || inp.w.size() != n) {
    throw DimensionError("subproblem: size mismatch");
  }
  if (!(inp.gamma > 0.0)) throw StepsizeError("subproblem: gamma must be positive");
  const double a_sq = inp.a.squaredNorm();
  if (a_sq == 0.0) throw DimensionError("subproblem: a must be nonzero");
  // Completing the square moves the linear term into the center.
  const Vector center = inp.z - inp.gamma * inp.w;
  Vector out(n);
  prox_phase_term({inp.a.data(), static_cast<std::size_t>(n)}, a_sq, inp.b, inp.gamma,
                  {center.data(), static_cast<std::size_t>(n)},
                  {out.data(), static_cast<std::size_t>(n)});
  return out;
}

ProxFn phase_term(Vector a, double b) {
  const double a_sq = a.squaredNorm();
  if (a_sq == 0.0) throw DimensionError("phase_term: a must be nonzero");
  ProxFn f;
  f.value = [a, b](const Vector& x) {
    const double t = a.dot(x);
    return std::abs(t * t - b);
  };
  f.prox = [a, b, a_sq](double gamma, const Vector& v) -> Vector {
    if (v.size() != a.size()) throw DimensionError("phase_term: size mismatch");
    Vector out(v.size());
    const auto n = static_cast<std::size_t>(v.size());
    prox_phase_term({a.data(), n}, a_sq, b, gamma, {v.data(), n}, {out.data(), n});
    return out;
  };
  f.weak_convexity = 2.0 * a_sq;
  return f;
}

ScenarioProblem to_scenario_problem(const Instance& inst, std::optional<double> mu) {
  std::vector<Scenario> scenarios;
  scenarios.reserve(static_cast<std::size_t>(inst.rows()));
  const double p = 1.0 / static_cast<double>(inst.rows());
  for (Index i = 0; i < inst.rows(); ++i) {
    scenarios.push_back({phase_term(inst.A.row(i).transpose(), inst.b(i)), p});
  }
  return ScenarioProblem(std::move(scenarios), inst.cols(), mu);
}

Vector spl_step(const Instance& inst, const Vector& x, double gamma, Index i) {
  if (i < 0 || i >= inst.rows()) throw DimensionError("spl_step: row index out of range");
  const Vector a = inst.A.row(i).transpose();
  const double ax = a.dot(x);
  return prox_absolute_linear(2.0 * ax * a, ax * ax - inst.b(i), gamma, x);
}

PdState pd_start(const ScenarioProblem& problem, const Vector& x0) {
  PdState st;
  st.z = problem.lift(x0);
  st.w = Vector::Zero(st.z.size());
  st.x_hat = st.z;
  return st;
}

PdState pd_step(const ScenarioProblem& problem, const PdState& state, double gamma) {
  if (!(gamma > 0.0)) throw StepsizeError("pd_step: gamma must be positive");
  PdState next;
  next.x_hat = problem.solve_scenarios(gamma, state.z - gamma * state.w);
  next.z = problem.subspace().project(next.x_hat);
  next.w = state.w + (next.x_hat - next.z) / gamma;
  next.iter = state.iter + 1;
  return next;
}

Vector spp_reduction_check(const SubproblemInput& inp) {
  if (inp.w.size() != inp.a.size() || inp.w.lpNorm<Eigen::Infinity>() != 0.0) {
    throw Error("spp_reduction_check requires w = 0");
  }
  const Vector closed = solve_subproblem_closed_form(inp);

  // Proximal point on |<a,x>^2 - b| only moves along a; in t = <a, x> it is
  // min_t |t^2 - b| + (t - c)^2 / (2 gamma |a|^2), c = <a, z>.
  const double a_sq = inp.a.squaredNorm();
  const double c = inp.a.dot(inp.z);
  const double k = inp.gamma * a_sq;
  const double r = std::sqrt(inp.b);
  auto value = [&](double t) { return std::abs(t * t - inp.b) + (t - c) * (t - c) / (2.0 * k); };
  std::vector<double> ts{c / (1.0 + 2.0 * k)};
  if (std::abs(1.0 - 2.0 * k) >= kSingularDenominator) ts.push_back(c / (1.0 - 2.0 * k));
  ts.push_back(r);
  ts.push_back(-r);
  double t_best = ts.front();
  for (double t : ts) {
    if (value(t) < value(t_best)) t_best = t;
  }
  const Vector spp = inp.z + ((t_best - c) / a_sq) * inp.a;

  const double scale = std::max({1.0, spp.lpNorm<Eigen::Infinity>(), closed.lpNorm<Eigen::Infinity>()});
  if ((spp - closed).lpNorm<Eigen::Infinity>() > 1e-10 * scale) {
    const double v_closed = subproblem_objective(inp, closed);
    const double v_spp = subproblem_objective(inp, spp);
    if (std::abs(v_closed - v_spp) > 1e-12 * std::max(1.0, std::abs(v_spp))) {
      throw Error("closed-form subproblem disagrees with the proximal point update");
    }
  }
  return closed;
}

}  // namespace wcdrs::phase
