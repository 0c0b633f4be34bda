#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "wcdrs/bench.hpp"
#include "wcdrs/error.hpp"
#include "wcdrs/phase_retrieval.hpp"

using namespace wcdrs;
using phase::SubproblemInput;

namespace {

SubproblemInput input(Vector a, double b, Vector z, Vector w, double gamma) {
  return {std::move(a), b, std::move(z), std::move(w), gamma};
}

SubproblemInput random_input(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1, 1);
  std::uniform_real_distribution<double> pos(0, 1);
  SubproblemInput in;
  in.a = oracle::random_vector(rng, 2);
  in.b = 1.5 * pos(rng);
  in.z = Vector{{unif(rng), unif(rng)}};
  in.w = 0.5 * Vector{{unif(rng), unif(rng)}};
  in.gamma = 0.05 + 0.95 * pos(rng);
  return in;
}

// Smallest |g| with g in the limiting subdifferential of the subproblem at x.
double stationarity(const SubproblemInput& in, const Vector& x) {
  const double t = in.a.dot(x);
  const double r = t * t - in.b;
  const Vector smooth = in.w + (x - in.z) / in.gamma;
  const Vector slope = 2.0 * t * in.a;
  if (std::abs(r) > 1e-9 * (1.0 + in.b)) return (smooth + (r > 0 ? 1.0 : -1.0) * slope).norm();
  // At the kink any multiplier in [-1, 1] on the slope is allowed.
  const double ss = slope.squaredNorm();
  const double mult = ss == 0.0 ? 0.0 : std::clamp(-smooth.dot(slope) / ss, -1.0, 1.0);
  return (smooth + mult * slope).norm();
}

}  // namespace

TEST(Instance, DeterministicAndConsistent) {
  const auto a = phase::generate_instance(30, 10, 0);
  const auto b = phase::generate_instance(30, 10, 0);
  EXPECT_EQ(phase::to_json(a), phase::to_json(b));
  EXPECT_TRUE(a.A == b.A && a.b == b.b && a.x_target == b.x_target);
  EXPECT_NE(phase::to_json(a), phase::to_json(phase::generate_instance(30, 10, 1)));
  EXPECT_EQ(phase::objective(a, a.x_target), 0.0);
  EXPECT_EQ(phase::objective(a, -a.x_target), 0.0);
  EXPECT_NEAR(a.x_target.norm(), 1.0, 1e-15);
  EXPECT_TRUE((a.b.array() >= 0).all());
}

TEST(Instance, PaperSizes) {
  const auto inst = phase::generate_instance(150, 50, 3);
  EXPECT_EQ(inst.A.rows(), 150);
  EXPECT_EQ(inst.A.cols(), 50);
  EXPECT_TRUE((inst.A.rowwise().norm().array() > 0).all());
  EXPECT_THROW(phase::generate_instance(0, 5, 1), DimensionError);
}

TEST(Instance, JsonRoundTripIsBitExact) {
  const auto inst = phase::generate_instance(7, 3, 42);
  const std::string text = phase::to_json(inst);
  const auto back = phase::instance_from_json(text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_TRUE(back.A == inst.A && back.b == inst.b && back.x_target == inst.x_target);
  EXPECT_EQ(phase::to_json(back), text);
  EXPECT_THROW(phase::instance_from_json(R"({"seed":1,"N":2,"n":2,"A":[1,2,3],"b":[1,1],"x_target":[1,0]})"),
               FormatError);
}

TEST(ClosedForm, TieBreakOnKinks) {
  const auto in = input(Vector{{1, 0}}, 1.0, Vector{{0, 0}}, Vector{{0, 0}}, 1.0);
  EXPECT_DOUBLE_EQ(phase::subproblem_objective(in, Vector{{0, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(phase::subproblem_objective(in, Vector{{1, 0}}), 0.5);
  EXPECT_DOUBLE_EQ(phase::subproblem_objective(in, Vector{{-1, 0}}), 0.5);
  EXPECT_TRUE(phase::solve_subproblem_closed_form(in) == (Vector{{1, 0}}));
  Vector arg;
  const double g = oracle::grid_min_2d(
      [&](double x, double y) { return phase::subproblem_objective(in, Vector{{x, y}}); }, -2, 2,
      4001, &arg);
  EXPECT_LT(phase::subproblem_objective(in, phase::solve_subproblem_closed_form(in)) - g, 1e-5);
}

TEST(ClosedForm, DataConsistentCenterIsKept) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vector a = oracle::random_vector(rng, 3), z = oracle::random_vector(rng, 3);
    const double gamma = 0.1 + k * 0.05;
    const auto in = input(a, std::pow(a.dot(z), 2), z, Vector::Zero(3), gamma);
    const Vector x = phase::solve_subproblem_closed_form(in);
    EXPECT_LE((x - z).norm(), 1e-14 * (1 + z.norm()));
    EXPECT_LE(phase::subproblem_objective(in, x), 1e-13);
  }
}

TEST(ClosedForm, SingularDenominatorSkipped) {
  // 2 gamma |a|^2 = 1: the second smooth candidate is undefined.
  const auto in = input(Vector{{1, 0}}, 0.0, Vector{{2, 0}}, Vector{{0, 0}}, 0.5);
  const Vector x = phase::solve_subproblem_closed_form(in);
  EXPECT_TRUE(x.allFinite());
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_EQ(x(1), 0.0);
  const auto g = oracle::grid_min_1d([](double t) { return t * t + (t - 2) * (t - 2); }, -3, 3, 1e-4);
  EXPECT_NEAR(g.arg, x(0), 1e-9);
}

TEST(ClosedForm, MatchesGridOracle) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    const auto in = random_input(rng);
    const Vector x = phase::solve_subproblem_closed_form(in);
    const double best = phase::subproblem_objective(in, x);
    const double grid = oracle::grid_min_2d(
        [&](double u, double v) { return phase::subproblem_objective(in, Vector{{u, v}}); }, -3, 3,
        1001);
    EXPECT_LE(best, grid + 1e-5) << "trial " << trial;
  }
}

TEST(ClosedForm, OutputIsCritical) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_input(rng);
    const Vector x = phase::solve_subproblem_closed_form(in);
    const double scale = 1.0 + in.w.norm() + (in.z.norm() + x.norm()) / in.gamma;
    EXPECT_LT(stationarity(in, x), 1e-8 * scale) << "trial " << trial;
  }
}

TEST(ClosedForm, LiteralKinkFormulaNeedsUnitStep) {
  // The kink candidates written as z - gamma (w - [(gamma<w,a> - <z,a> +- sqrt b)/|a|^2] a)
  // land on <a,x> = +-sqrt(b) only when gamma = 1; the implementation uses
  // the projection onto the hyperplane instead.
  const Vector a{{1.0, 2.0}}, z{{0.3, -0.1}}, w{{0.2, 0.4}};
  const double b = 0.8;
  for (double gamma : {0.3, 1.0, 2.0}) {
    const double coef = (gamma * w.dot(a) - z.dot(a) + std::sqrt(b)) / a.squaredNorm();
    const Vector literal = z - gamma * (w - coef * a);
    const double on_kink = std::abs(std::pow(a.dot(literal), 2) - b);
    if (gamma == 1.0) {
      EXPECT_LT(on_kink, 1e-12);
    } else {
      EXPECT_GT(on_kink, 1e-3);
    }
    const Vector center = z - gamma * w;
    const Vector projected = center + ((std::sqrt(b) - center.dot(a)) / a.squaredNorm()) * a;
    EXPECT_LT(std::abs(std::pow(a.dot(projected), 2) - b), 1e-12);
  }
}

TEST(ClosedForm, RejectsDegenerateInput) {
  EXPECT_THROW(phase::solve_subproblem_closed_form(
                   input(Vector{{0, 0}}, 1.0, Vector{{0, 0}}, Vector{{0, 0}}, 1.0)),
               DimensionError);
  EXPECT_THROW(phase::phase_term(Vector::Zero(3), 1.0), DimensionError);
  EXPECT_EQ(phase::phase_term(Vector{{1, 1}}, 1.0).weak_convexity, 4.0);
}

TEST(Spp, ReductionAgrees) {
  const auto in = input(Vector{{1, 0}}, 1.0, Vector{{0, 0}}, Vector{{0, 0}}, 1.0);
  EXPECT_TRUE(phase::spp_reduction_check(in) == phase::solve_subproblem_closed_form(in));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto r = random_input(rng);
    r.w = Vector::Zero(2);
    r.gamma *= 0.1;
    const Vector x = phase::spp_reduction_check(r);
    // 1-D grid along a through z.
    const double a_sq = r.a.squaredNorm();
    const auto g = oracle::grid_min_1d(
        [&](double beta) { return phase::subproblem_objective(r, r.z + beta * r.a); },
        -4.0 / a_sq, 4.0 / a_sq, 1e-5 / a_sq);
    EXPECT_LE(phase::subproblem_objective(r, x), g.value + 1e-10);
  }
  auto bad = in;
  bad.w = Vector{{0.1, 0}};
  EXPECT_THROW(phase::spp_reduction_check(bad), Error);
}

TEST(Spp, SignSymmetry) {
  const auto inst = phase::generate_instance(20, 4, 8);
  for (Index i = 0; i < inst.rows(); ++i) {
    const auto in = input(inst.A.row(i).transpose(), inst.b(i), -inst.x_target, Vector::Zero(4), 0.3);
    EXPECT_LE((phase::spp_reduction_check(in) + inst.x_target).norm(), 1e-14);
  }
}

TEST(Spl, Examples) {
  const auto inst = phase::generate_instance(5, 3, 1);
  EXPECT_TRUE(phase::spl_step(inst, inst.x_target, 0.5, 2) == inst.x_target);
  EXPECT_TRUE(phase::spl_step(inst, Vector::Zero(3), 0.5, 0) == Vector::Zero(3));
  EXPECT_THROW(phase::spl_step(inst, Vector::Zero(3), 0.5, 5), DimensionError);

  phase::Instance tiny;
  tiny.A = Matrix{{1, 0}};
  tiny.b = Vector{{1.0}};
  tiny.x_target = Vector{{1, 0}};
  const Vector x = phase::spl_step(tiny, Vector{{2, 0}}, 1.0, 0);
  EXPECT_NEAR(x(0), 1.25, 1e-15);
  EXPECT_EQ(x(1), 0.0);
  const auto g = oracle::grid_min_1d(
      [](double t) { return std::abs(3.0 + 4.0 * (-t * 4.0)) + std::pow(4.0 * t, 2) / 2.0; }, -1, 1,
      1e-5);
  EXPECT_NEAR(2.0 - 4.0 * g.arg, 1.25, 1e-4);
}

TEST(Spl, ModelObjectiveNeverIncreases) {
  const auto inst = phase::generate_instance(40, 6, 3);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    const Vector x = oracle::random_vector(rng, 6);
    const Index i = k % 40;
    const Vector a = inst.A.row(i).transpose();
    const double r = std::pow(a.dot(x), 2) - inst.b(i);
    const Vector c = 2.0 * a.dot(x) * a;
    const double gamma = 1e-3;
    const Vector y = phase::spl_step(inst, x, gamma, i);
    EXPECT_LE(std::abs(r + c.dot(y - x)) + (y - x).squaredNorm() / (2 * gamma), std::abs(r) + 1e-12);
  }
}

TEST(Pd, ConsensusFixedPoint) {
  const ScenarioProblem pb({{zero_prox(), 0.5}, {zero_prox(), 0.5}}, 1, 1.0);
  const auto st = phase::pd_start(pb, Vector{{0.7}});
  const auto next = phase::pd_step(pb, st, 1.0);
  EXPECT_TRUE(next.z == st.z);
  EXPECT_TRUE(next.w == st.w);
}

TEST(Pd, TwoScenarioUpdate) {
  const ScenarioProblem pb({{point_indicator(Vector{{1.0}}), 0.5}, {point_indicator(Vector{{3.0}}), 0.5}}, 1,
                           1.0);
  const auto st = phase::pd_start(pb, Vector{{0.0}});
  const auto next = phase::pd_step(pb, st, 1.0);
  EXPECT_TRUE(next.x_hat == (Vector{{1, 3}}));
  EXPECT_TRUE(next.z == (Vector{{2, 2}}));
  EXPECT_TRUE(next.w == (Vector{{-1, 1}}));
}

TEST(Pd, DualStaysOrthogonal) {
  const auto inst = phase::generate_instance(30, 10, 6);
  const auto pb = phase::to_scenario_problem(inst);
  auto st = phase::pd_start(pb, Vector::Ones(10) / std::sqrt(10.0));
  for (int k = 0; k < 100; ++k) {
    st = phase::pd_step(pb, st, 0.5);
    const double wn = pb.geometry().norm(st.w);
    EXPECT_LE(pb.geometry().norm(pb.subspace().project(st.w)), 1e-12 * std::max(1.0, wn));
  }
}

// The allocation-free benchmark runners must follow the library iterations.
TEST(FastRunners, DrMatchesPhStep) {
  const auto inst = phase::generate_instance(30, 10, 21);
  const Vector x0 = Vector::LinSpaced(10, 1, -1).normalized();
  const auto pb = phase::to_scenario_problem(inst);
  for (double lambda : {0.5, 1.95}) {
    const double gamma = 0.99 * (2 - lambda) / (2 * pb.mu());
    std::vector<double> fast;
    bench::RunSettings rs;
    rs.max_iter = 300;
    rs.target_accuracy = 0.0;
    rs.on_iteration = [&](int, double best) { fast.push_back(best); };
    const auto rec = bench::run_dr(inst, x0, lambda, gamma, pb.mu(), rs);
    ASSERT_EQ(fast.size(), 300u);
    PhState st = ph_start(pb, gamma, pb.lift(x0));
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 300; ++k) {
      const Vector m = pb.subspace().project(st.x).head(10);
      best = std::min(best, phase::objective(inst, m));
      EXPECT_NEAR(fast[static_cast<std::size_t>(k)], best, 1e-12 * std::max(1.0, best));
      st = ph_step(pb, gamma, lambda, st);
    }
    EXPECT_EQ(rec.iterations, 300);
    EXPECT_TRUE(rec.admissible);
  }
}

TEST(FastRunners, PdMatchesPdStep) {
  const auto inst = phase::generate_instance(30, 10, 22);
  const Vector x0 = Vector::LinSpaced(10, -1, 2).normalized();
  const auto pb = phase::to_scenario_problem(inst);
  std::vector<double> fast;
  bench::RunSettings rs;
  rs.max_iter = 200;
  rs.target_accuracy = 0.0;
  rs.on_iteration = [&](int, double best) { fast.push_back(best); };
  bench::run_pd(inst, x0, 0.3, rs);
  auto st = phase::pd_start(pb, x0);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    st = phase::pd_step(pb, st, 0.3);
    best = std::min(best, phase::objective(inst, st.z.head(10)));
    EXPECT_NEAR(fast[static_cast<std::size_t>(k)], best, 1e-12 * std::max(1.0, best));
  }
}

TEST(FastRunners, SplMatchesSplStep) {
  const auto inst = phase::generate_instance(30, 10, 23);
  const Vector x0 = Vector::LinSpaced(10, 0.5, -2).normalized();
  std::vector<double> fast;
  bench::RunSettings rs;
  rs.max_iter = 100;
  rs.target_accuracy = 0.0;
  rs.on_iteration = [&](int, double best) { fast.push_back(best); };
  bench::run_spl(inst, x0, 0.05, 99, rs);
  std::mt19937_64 rng(99);
  std::vector<int> order(30);
  std::iota(order.begin(), order.end(), 0);
  Vector x = x0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int i : order) x = phase::spl_step(inst, x, 0.05, i);
    best = std::min(best, phase::objective(inst, x));
    EXPECT_NEAR(fast[static_cast<std::size_t>(k)], best, 1e-10 * std::max(1.0, best));
  }
}

TEST(FastRunners, StopAtTarget) {
  const auto inst = phase::generate_instance(6, 2, 1);
  bench::RunSettings rs;
  rs.max_iter = 5000;
  rs.target_accuracy = 1e-6;
  // Starting at the target stops after the first evaluation.
  const auto rec = bench::run_pd(inst, inst.x_target, 0.1, rs);
  EXPECT_EQ(rec.iterations, 1);
  EXPECT_LE(rec.best_accuracy, 1e-6);
}
