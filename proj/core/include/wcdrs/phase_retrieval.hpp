#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "wcdrs/functions.hpp"
#include "wcdrs/hedging.hpp"
#include "wcdrs/types.hpp"

namespace wcdrs::phase {

/// Real phase retrieval data: b_i = <a_i, x_target>^2 with Gaussian rows a_i,
/// so min (1/N) sum_i |<a_i, x>^2 - b_i| has optimal value 0.
struct Instance {
  std::uint64_t seed = 0;
  /// N x n, row i is a_i.
  Matrix A;
  Vector b;
  Vector x_target;

  Index rows() const noexcept { return A.rows(); }
  Index cols() const noexcept { return A.cols(); }
};

/// Rows of A i.i.d. standard normal, x_target uniform on the unit sphere;
/// deterministic in (N, n, seed).
Instance generate_instance(Index rows, Index cols, std::uint64_t seed);

/// (1/N) sum_i |<a_i, x>^2 - b_i|.
double objective(const Instance& inst, const Vector& x);

/// {"seed", "N", "n", "A" (row-major), "b", "x_target"}; doubles round-trip
/// bit-exactly.
std::string to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& inst, const std::filesystem::path& path);

/// min_x |<a, x>^2 - b| + w^T x + |x - z|^2 / (2 gamma).
struct SubproblemInput {
  Vector a;
  double b = 0.0;
  Vector z;
  Vector w;
  double gamma = 0.0;
};

double subproblem_objective(const SubproblemInput& inp, const Vector& x);

/// Evaluates the four critical-point candidates
///   z - gamma (w - 2 [(gamma <w,a> - <z,a>) / (2 gamma |a|^2 +- 1)] a)
///   (z - gamma w) + [(+-sqrt(b) - <z - gamma w, a>) / |a|^2] a
/// and returns the one with the lowest subproblem objective. Ties go to the
/// earlier candidate in the order listed (+ before -). The second "-" is
/// skipped when |2 gamma |a|^2 - 1| < 1e-12.
Vector solve_subproblem_closed_form(const SubproblemInput& inp);

/// Allocation-free form of solve_subproblem_closed_form for w = 0, i.e. the
/// prox of |<a, .>^2 - b| at `center`. `a_sq` is |a|^2.
void prox_phase_term(std::span<const double> a, double a_sq, double b,
                     double gamma, std::span<const double> center,
                     std::span<double> out);

/// |<a, x>^2 - b| as a ProxFn (2 |a|^2-weakly convex).
ProxFn phase_term(Vector a, double b);

/// Progressive-hedging view of the instance: scenario i is |<a_i, x_i>^2 - b_i| with
/// p_i = 1/N. mu defaults to sqrt(N)/2.
ScenarioProblem to_scenario_problem(const Instance& inst,
                                    std::optional<double> mu = std::nullopt);

/// Stochastic prox-linear step on row i (0-based): linearise the square
/// inside the absolute value at x and apply prox_absolute_linear.
Vector spl_step(const Instance& inst, const Vector& x, double gamma, Index i);

/// Progressive decoupling with elicitation 0. z is a block vector in N, w in
/// N-perp; x_hat holds the last subproblem solutions.
struct PdState {
  Vector z;
  Vector w;
  Vector x_hat;
  int iter = 0;
};

PdState pd_start(const ScenarioProblem& problem, const Vector& x0);

/// x_hat_i = argmin f_i + w_i^T x_i + |x_i - z_i|^2/(2 gamma), then
/// z' = P_N(x_hat) and w' = w + gamma^{-1} P_{N-perp}(x_hat).
PdState pd_step(const ScenarioProblem& problem, const PdState& state,
                double gamma);

/// With w = 0 the subproblem is one stochastic proximal point update.
/// Recomputes that update independently (1-D reduction along a) and throws
/// Error when it disagrees with solve_subproblem_closed_form beyond 1e-10.
/// Requires w = 0.
Vector spp_reduction_check(const SubproblemInput& inp);

}  // namespace wcdrs::phase
