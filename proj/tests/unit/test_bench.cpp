#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wcdrs/bench.hpp"
#include "wcdrs/error.hpp"

using namespace wcdrs;
using namespace wcdrs::bench;

namespace {

BenchConfig small_config() {
  BenchConfig c;
  c.sizes = {{8, 3}};
  c.num_starts = 2;
  c.max_iter = 40;
  c.lambda_grid = {0.5, 1.5};
  c.gamma_rule.count = 2;
  c.stepsize_count = 3;
  return c;
}

RunRecord record(Method m, double best, int rows = 30, int cols = 10) {
  RunRecord r;
  r.method = m;
  r.rows = rows;
  r.cols = cols;
  r.best_accuracy = best;
  return r;
}

std::string runs_csv(const std::vector<RunRecord>& recs) {
  std::ostringstream out;
  write_runs_csv(out, recs);
  return out.str();
}

}  // namespace

TEST(Grids, Defaults) {
  const BenchConfig c;
  ASSERT_EQ(c.lambda_grid.size(), 20u);
  EXPECT_EQ(c.lambda_grid.front(), 0.05);
  EXPECT_EQ(c.lambda_grid.back(), 1.95);
  EXPECT_NEAR(c.lambda_grid[1] - c.lambda_grid[0], 0.1, 1e-15);
  EXPECT_EQ(c.sizes, (std::vector<std::pair<int, int>>{{30, 10}, {150, 50}, {300, 100}}));
  EXPECT_EQ(c.num_starts, 15);
  EXPECT_EQ(c.max_iter, 5000);
  EXPECT_EQ(c.target_accuracy, 1e-6);
  EXPECT_DOUBLE_EQ(c.mu_for(30), std::sqrt(30.0) / 2);

  const double mu = c.mu_for(30);
  const auto g = gamma_grid(c.gamma_rule, 1.0, mu);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 0.01);
  EXPECT_DOUBLE_EQ(g.back(), 0.99 * 1.0 / (2 * mu));
  GammaRule single{1, 0.01, 0.99};
  const auto g1 = gamma_grid(single, 1.95, mu);
  ASSERT_EQ(g1.size(), 1u);
  EXPECT_DOUBLE_EQ(g1[0], 0.99 * 0.05 / (2 * mu));

  const auto steps = open_grid(1e-4, 1.0, 100);
  ASSERT_EQ(steps.size(), 100u);
  EXPECT_GT(steps.front(), 1e-4);
  EXPECT_LT(steps.back(), 1.0);
  EXPECT_TRUE(linspace(0, 1, 0).empty());
}

TEST(Methods, Names) {
  for (Method m : {Method::DR, Method::SPL, Method::PD}) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("ADMM"), FormatError);
}

TEST(RunBenchmark, Cardinality) {
  BenchConfig c;
  c.sizes = {{30, 10}};
  c.methods = {Method::DR};
  c.num_starts = 1;
  c.lambda_grid = {1.0};
  c.max_iter = 5;
  EXPECT_EQ(planned_runs(c), 5u);
  EXPECT_EQ(run_benchmark(c).size(), 5u);

  BenchConfig full;
  full.methods = {Method::DR};
  EXPECT_EQ(planned_runs(full), 3u * 15u * 20u * 5u);
  full.methods = {Method::DR, Method::SPL, Method::PD};
  EXPECT_EQ(planned_runs(full), 4500u + 2u * 3u * 15u * 100u);
}

TEST(RunBenchmark, DeterministicAcrossThreadCounts) {
  BenchConfig a = small_config();
  a.threads = 1;
  BenchConfig b = small_config();
  b.threads = 3;
  const auto ra = run_benchmark(a);
  const auto rb = run_benchmark(b);
  EXPECT_EQ(runs_csv(ra), runs_csv(rb));
  EXPECT_EQ(runs_csv(ra), runs_csv(run_benchmark(a)));
  std::ostringstream ta, tb;
  write_tables_csv(ta, ra, a.table_thresholds);
  write_tables_csv(tb, rb, b.table_thresholds);
  EXPECT_EQ(ta.str(), tb.str());
  // Sorted by (method, N, n, start, lambda, gamma).
  for (std::size_t k = 1; k < ra.size(); ++k) {
    EXPECT_LE(static_cast<int>(ra[k - 1].method), static_cast<int>(ra[k].method));
  }
}

TEST(RunBenchmark, InadmissibleGammasFlagged) {
  BenchConfig c;
  c.sizes = {{30, 10}};
  c.methods = {Method::DR};
  c.num_starts = 1;
  c.lambda_grid = {1.95};
  c.max_iter = 3;
  const auto recs = run_benchmark(c);
  const double bound = 0.05 / (2 * c.mu_for(30));
  for (const auto& r : recs) {
    EXPECT_EQ(r.admissible, r.gamma < bound);
    EXPECT_TRUE(r.error.empty());
  }
  // The grid spans 0.99 of the bound up to 0.01; records sort by gamma, so
  // only the first one is admissible.
  EXPECT_TRUE(recs.front().admissible);
  EXPECT_FALSE(recs.back().admissible);
}

TEST(RunBenchmark, BestAccuracyNonincreasing) {
  const auto inst = phase::generate_instance(10, 3, 5);
  const Vector x0 = Vector::Ones(3).normalized();
  RunSettings rs;
  rs.max_iter = 100;
  rs.target_accuracy = 0.0;
  double last = std::numeric_limits<double>::infinity();
  rs.on_iteration = [&](int, double best) {
    EXPECT_LE(best, last);
    last = best;
  };
  run_dr(inst, x0, 1.0, 0.05, 1.0, rs);
  last = std::numeric_limits<double>::infinity();
  run_spl(inst, x0, 0.05, 1, rs);
  last = std::numeric_limits<double>::infinity();
  run_pd(inst, x0, 0.05, rs);
}

TEST(AccuracyTable, Percentages) {
  const std::vector<double> th{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<RunRecord> recs{record(Method::DR, 0.5), record(Method::DR, 5e-3), record(Method::DR, 1e-7),
                              record(Method::DR, 2e-4)};
  const auto t = accuracy_table(recs, th);
  EXPECT_EQ(t, (std::vector<double>{75, 75, 50, 25, 25, 25}));
  for (std::size_t k = 1; k < t.size(); ++k) EXPECT_LE(t[k], t[k - 1]);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(accuracy_table({record(Method::PD, inf), record(Method::PD, inf)}, th),
            std::vector<double>(6, 0.0));
}

TEST(AccuracyTable, CsvShape) {
  std::vector<RunRecord> recs{record(Method::DR, 1e-7), record(Method::DR, 0.5),
                              record(Method::SPL, 1e-3, 150, 50)};
  std::ostringstream out;
  write_tables_csv(out, recs, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  const std::string expected =
      "method,N,n,runs,<1e-01,<1e-02,<1e-03,<1e-04,<1e-05,<1e-06\n"
      "DR,all,all,2,50.000,50.000,50.000,50.000,50.000,50.000\n"
      "DR,30,10,2,50.000,50.000,50.000,50.000,50.000,50.000\n"
      "SPL,all,all,1,100.000,100.000,0.000,0.000,0.000,0.000\n"
      "SPL,150,50,1,100.000,100.000,0.000,0.000,0.000,0.000\n";
  EXPECT_EQ(out.str(), expected);
}

TEST(Profile, StepCurve) {
  const auto prof = performance_profile({record(Method::DR, 1e-4)}, default_profile_thresholds());
  ASSERT_EQ(prof.methods, std::vector<Method>{Method::DR});
  for (std::size_t t = 0; t < prof.thresholds.size(); ++t) {
    EXPECT_EQ(prof.fractions[0][t], prof.thresholds[t] >= 1e-4 ? 1.0 : 0.0);
  }
  EXPECT_EQ(prof.thresholds.size(), 49u);
  EXPECT_NEAR(prof.thresholds.front(), 1e-12, 1e-27);
  EXPECT_NEAR(prof.thresholds.back(), 1.0, 1e-15);
}

TEST(Profile, EmptyThresholds) {
  const auto prof = performance_profile({record(Method::DR, 1e-4)}, {});
  std::ostringstream out;
  write_profile_csv(out, prof);
  EXPECT_EQ(out.str(), "threshold,DR\n");
}

TEST(Profile, MonotoneAndBounded) {
  std::vector<RunRecord> recs;
  for (int k = 0; k < 40; ++k) {
    recs.push_back(record(Method::SPL, std::pow(10.0, -k % 13)));
    recs.push_back(record(Method::PD, std::pow(10.0, -(k * 7) % 11)));
  }
  const auto prof = performance_profile(recs, default_profile_thresholds());
  for (const auto& curve : prof.fractions) {
    for (std::size_t t = 0; t < curve.size(); ++t) {
      EXPECT_GE(curve[t], 0.0);
      EXPECT_LE(curve[t], 1.0);
      if (t > 0) EXPECT_GE(curve[t], curve[t - 1]);
    }
  }
}

TEST(Config, JsonRoundTrip) {
  BenchConfig c = small_config();
  c.mu_fixed = 2.5;
  c.methods = {Method::PD};
  c.seed = 77;
  const BenchConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.sizes, c.sizes);
  EXPECT_EQ(back.num_starts, c.num_starts);
  EXPECT_EQ(back.lambda_grid, c.lambda_grid);
  EXPECT_EQ(back.gamma_rule.count, 2);
  EXPECT_EQ(back.mu_fixed, 2.5);
  EXPECT_EQ(back.methods, c.methods);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  const auto partial = config_from_json(R"({"sizes": [[30, 10]], "lambda_grid": {"lo": 1, "hi": 1.5, "count": 3}})");
  EXPECT_EQ(partial.lambda_grid, (std::vector<double>{1.0, 1.25, 1.5}));
  EXPECT_EQ(partial.num_starts, 15);
  EXPECT_FALSE(partial.mu_fixed);
  EXPECT_THROW(config_from_json(R"({"mu": "N^2"})"), FormatError);
  EXPECT_THROW(config_from_json(R"({"methods": ["XYZ"]})"), FormatError);
}

TEST(RunsCsv, Columns) {
  RunRecord r = record(Method::SPL, 0.125);
  r.gamma = 0.5;
  r.iterations = 7;
  std::ostringstream out;
  write_runs_csv(out, {r}, true);
  EXPECT_EQ(out.str(),
            "method,N,n,start,lambda,gamma,mu,admissible,best_accuracy,best_penalized,iterations,error,"
            "wall_seconds\nSPL,30,10,0,,0.5,,1,0.125,,7,,0\n");
}
