#include "wcdrs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "wcdrs/error.hpp"
#include "wcdrs/trace.hpp"

namespace wcdrs::bench {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto p : parts) h = splitmix(h ^ splitmix(p));
  return h;
}

constexpr std::uint64_t kInstanceSalt = 1;
constexpr std::uint64_t kStartSalt = 2;
constexpr std::uint64_t kShuffleSalt = 3;

/// Row-major copy of the instance with cached squared row norms.
struct Rows {
  int count;
  int dim;
  std::vector<double> a;
  std::vector<double> a_sq;
  std::vector<double> b;

  explicit Rows(const phase::Instance& inst)
      : count(static_cast<int>(inst.rows())), dim(static_cast<int>(inst.cols())) {
    a.resize(static_cast<std::size_t>(count) * dim);
    a_sq.resize(static_cast<std::size_t>(count));
    b.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < dim; ++j) a[static_cast<std::size_t>(i) * dim + j] = inst.A(i, j);
      a_sq[static_cast<std::size_t>(i)] = inst.A.row(i).squaredNorm();
      b[static_cast<std::size_t>(i)] = inst.b(i);
    }
  }

  std::span<const double> row(int i) const {
    return {a.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }

  double objective(const double* x) const {
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
      const double* ai = a.data() + static_cast<std::size_t>(i) * dim;
      double t = 0.0;
      for (int j = 0; j < dim; ++j) t += ai[j] * x[j];
      total += std::abs(t * t - b[static_cast<std::size_t>(i)]);
    }
    return total / count;
  }
};

/// mean = sum_i p x_i in scenario order.
void consensus_mean(const std::vector<double>& x, int count, int dim, double p,
                    std::vector<double>& mean) {
  std::fill(mean.begin(), mean.end(), 0.0);
  for (int i = 0; i < count; ++i) {
    const double* xi = x.data() + static_cast<std::size_t>(i) * dim;
    for (int j = 0; j < dim; ++j) mean[static_cast<std::size_t>(j)] += p * xi[j];
  }
}

struct Tracker {
  const RunSettings& settings;
  RunRecord& record;
  Clock::time_point t0 = Clock::now();

  /// Returns true when the target is reached.
  bool observe(int k, double accuracy) {
    if (accuracy < record.best_accuracy) record.best_accuracy = accuracy;
    record.iterations = k + 1;
    if (settings.on_iteration) settings.on_iteration(k, record.best_accuracy);
    return record.best_accuracy <= settings.target_accuracy;
  }
  void finish() {
    record.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
};

RunRecord blank_record(Method m, const phase::Instance& inst) {
  RunRecord r;
  r.method = m;
  r.rows = static_cast<int>(inst.rows());
  r.cols = static_cast<int>(inst.cols());
  r.best_accuracy = std::numeric_limits<double>::infinity();
  r.best_penalized = std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::DR: return "DR";
    case Method::SPL: return "SPL";
    case Method::PD: return "PD";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "DR") return Method::DR;
  if (name == "SPL") return Method::SPL;
  if (name == "PD") return Method::PD;
  throw FormatError("unknown method '" + name + "' (expected DR, SPL or PD)");
}

std::vector<double> BenchConfig::default_lambda_grid() { return linspace(0.05, 1.95, 20); }

double BenchConfig::mu_for(int rows) const {
  return mu_fixed.value_or(std::sqrt(static_cast<double>(rows)) / 2.0);
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  for (int k = 0; k < count; ++k) out.push_back(lo + (hi - lo) * k / (count - 1));
  out.back() = hi;
  return out;
}

std::vector<double> open_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(lo + (hi - lo) * k / (count + 1));
  return out;
}

std::vector<double> gamma_grid(const GammaRule& rule, double lambda, double mu) {
  const double hi = rule.hi_fraction * (2.0 - lambda) / (2.0 * mu);
  if (rule.count == 1) return {hi};
  return linspace(rule.lo, hi, rule.count);
}

RunRecord run_dr(const phase::Instance& inst, const Vector& x0, double lambda,
                 double gamma, double mu, const RunSettings& settings) {
  RunRecord rec = blank_record(Method::DR, inst);
  rec.lambda = lambda;
  rec.gamma = gamma;
  rec.mu = mu;
  rec.admissible = gamma > 0.0 && gamma < (2.0 - lambda) / (2.0 * mu);
  Tracker tracker{settings, rec};

  const Rows rows(inst);
  const int N = rows.count;
  const int n = rows.dim;
  const auto total = static_cast<std::size_t>(N) * n;
  const double p = 1.0 / N;
  const double theta = gamma * mu / (1.0 + gamma * mu);
  const double dual_scale = mu / (1.0 + gamma * mu);

  std::vector<double> s(total), z(total), w(total, 0.0), x(total);
  std::vector<double> center(static_cast<std::size_t>(n)), mean(static_cast<std::size_t>(n));
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(i) * n + j] = x0(j);
  }
  z = s;

  for (int k = 0; k < settings.max_iter; ++k) {
    for (int i = 0; i < N; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) center[j] = z[off + j] - gamma * w[off + j];
      phase::prox_phase_term(rows.row(i), rows.a_sq[i], rows.b[i], gamma, center,
                             {x.data() + off, static_cast<std::size_t>(n)});
    }
    consensus_mean(x, N, n, p, mean);
    double penalized = 0.0;
    for (int i = 0; i < N; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      const auto a = rows.row(i);
      double az = 0.0, gap = 0.0;
      for (int j = 0; j < n; ++j) {
        az += a[j] * z[off + j];
        const double d = x[off + j] - mean[j];
        gap += d * d;
      }
      penalized += p * (std::abs(az * az - rows.b[i]) + 0.5 * mu * gap);
    }
    rec.best_penalized = std::min(rec.best_penalized, penalized);
    if (tracker.observe(k, rows.objective(mean.data()))) break;

    for (std::size_t q = 0; q < total; ++q) s[q] = s[q] + lambda * (x[q] - z[q]);
    consensus_mean(s, N, n, p, mean);
    for (int i = 0; i < N; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        const double sq = s[off + j];
        w[off + j] = dual_scale * (sq - mean[j]);
        z[off + j] = sq + theta * (mean[j] - sq);
      }
    }
  }
  tracker.finish();
  return rec;
}

RunRecord run_spl(const phase::Instance& inst, const Vector& x0, double gamma,
                  std::uint64_t shuffle_seed, const RunSettings& settings) {
  RunRecord rec = blank_record(Method::SPL, inst);
  rec.gamma = gamma;
  Tracker tracker{settings, rec};

  const Rows rows(inst);
  const int n = rows.dim;
  std::vector<double> x(x0.data(), x0.data() + n);
  std::vector<int> order(static_cast<std::size_t>(rows.count));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(shuffle_seed);

  for (int k = 0; k < settings.max_iter; ++k) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int i : order) {
      const auto a = rows.row(i);
      double ax = 0.0;
      for (int j = 0; j < n; ++j) ax += a[j] * x[j];
      // c = 2 <a,x> a, |c|^2 = 4 <a,x>^2 |a|^2.
      const double cc = 4.0 * ax * ax * rows.a_sq[i];
      if (cc == 0.0) continue;
      const double r = ax * ax - rows.b[i];
      const double t = std::copysign(std::min(std::abs(r) / cc, gamma), r);
      for (int j = 0; j < n; ++j) x[j] -= t * 2.0 * ax * a[j];
    }
    if (tracker.observe(k, rows.objective(x.data()))) break;
  }
  tracker.finish();
  return rec;
}

RunRecord run_pd(const phase::Instance& inst, const Vector& x0, double gamma,
                 const RunSettings& settings) {
  RunRecord rec = blank_record(Method::PD, inst);
  rec.gamma = gamma;
  Tracker tracker{settings, rec};

  const Rows rows(inst);
  const int N = rows.count;
  const int n = rows.dim;
  const auto total = static_cast<std::size_t>(N) * n;
  const double p = 1.0 / N;
  std::vector<double> w(total, 0.0), x(total), center(static_cast<std::size_t>(n));
  std::vector<double> z(x0.data(), x0.data() + n), mean(static_cast<std::size_t>(n));

  for (int k = 0; k < settings.max_iter; ++k) {
    for (int i = 0; i < N; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) center[j] = z[j] - gamma * w[off + j];
      phase::prox_phase_term(rows.row(i), rows.a_sq[i], rows.b[i], gamma, center,
                             {x.data() + off, static_cast<std::size_t>(n)});
    }
    consensus_mean(x, N, n, p, mean);
    for (int i = 0; i < N; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) w[off + j] = w[off + j] + (x[off + j] - mean[j]) / gamma;
    }
    z = mean;
    if (tracker.observe(k, rows.objective(z.data()))) break;
  }
  tracker.finish();
  return rec;
}

phase::Instance problem_instance(const BenchConfig& config, int rows, int cols, int start) {
  const auto seed = mix({config.seed, kInstanceSalt, static_cast<std::uint64_t>(rows),
                         static_cast<std::uint64_t>(cols), static_cast<std::uint64_t>(start)});
  return phase::generate_instance(rows, cols, seed);
}

Vector start_point(const BenchConfig& config, int rows, int cols, int start) {
  std::mt19937_64 rng(mix({config.seed, kStartSalt, static_cast<std::uint64_t>(rows),
                           static_cast<std::uint64_t>(cols), static_cast<std::uint64_t>(start)}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(cols);
  do {
    for (int j = 0; j < cols; ++j) x(j) = normal(rng);
  } while (x.norm() == 0.0);
  return x / x.norm();
}

namespace {

struct Job {
  Method method;
  std::size_t problem;  // index into the problem list
  int start;
  double lambda;
  double gamma;
  std::size_t param_index;
};

std::vector<Job> plan(const BenchConfig& config) {
  std::vector<Job> jobs;
  std::size_t problem = 0;
  for (const auto& [rows, cols] : config.sizes) {
    const double mu = config.mu_for(rows);
    for (int start = 0; start < config.num_starts; ++start, ++problem) {
      for (Method m : config.methods) {
        if (m == Method::DR) {
          std::size_t idx = 0;
          for (double lambda : config.lambda_grid) {
            for (double gamma : gamma_grid(config.gamma_rule, lambda, mu)) {
              jobs.push_back({m, problem, start, lambda, gamma, idx++});
            }
          }
        } else {
          const auto steps = open_grid(config.stepsize_lo, config.stepsize_hi, config.stepsize_count);
          for (std::size_t idx = 0; idx < steps.size(); ++idx) {
            jobs.push_back({m, problem, start, 0.0, steps[idx], idx});
          }
        }
      }
    }
  }
  return jobs;
}

}  // namespace

std::size_t planned_runs(const BenchConfig& config) { return plan(config).size(); }

std::vector<RunRecord> run_benchmark(const BenchConfig& config) {
  struct Problem {
    phase::Instance inst;
    Vector x0;
    double mu;
  };
  std::vector<Problem> problems;
  for (const auto& [rows, cols] : config.sizes) {
    if (rows < 1 || cols < 1) throw FormatError("benchmark sizes must be positive");
    for (int start = 0; start < config.num_starts; ++start) {
      problems.push_back({problem_instance(config, rows, cols, start),
                          start_point(config, rows, cols, start), config.mu_for(rows)});
    }
  }
  const std::vector<Job> jobs = plan(config);
  std::vector<RunRecord> records(jobs.size());
  RunSettings settings;
  settings.max_iter = config.max_iter;
  settings.target_accuracy = config.target_accuracy;

  auto execute = [&](std::size_t j) {
    const Job& job = jobs[j];
    const Problem& pb = problems[job.problem];
    RunRecord rec;
    try {
      switch (job.method) {
        case Method::DR:
          rec = run_dr(pb.inst, pb.x0, job.lambda, job.gamma, pb.mu, settings);
          break;
        case Method::SPL:
          rec = run_spl(pb.inst, pb.x0, job.gamma,
                        mix({pb.inst.seed, kShuffleSalt, job.param_index}), settings);
          break;
        case Method::PD:
          rec = run_pd(pb.inst, pb.x0, job.gamma, settings);
          break;
      }
    } catch (const std::exception& e) {
      rec = RunRecord{};
      rec.method = job.method;
      rec.rows = static_cast<int>(pb.inst.rows());
      rec.cols = static_cast<int>(pb.inst.cols());
      rec.lambda = job.lambda;
      rec.gamma = job.gamma;
      rec.best_accuracy = std::numeric_limits<double>::infinity();
      rec.best_penalized = std::numeric_limits<double>::infinity();
      rec.error = e.what();
    }
    rec.start = job.start;
    if (job.method == Method::DR) rec.mu = pb.mu;
    records[j] = std::move(rec);
  };

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) execute(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) execute(j);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.method, a.rows, a.cols, a.start, a.lambda, a.gamma) <
           std::tie(b.method, b.rows, b.cols, b.start, b.lambda, b.gamma);
  });
  return records;
}

std::vector<double> accuracy_table(const std::vector<RunRecord>& records,
                                   const std::vector<double>& thresholds) {
  std::vector<double> out;
  for (double t : thresholds) {
    if (records.empty()) {
      out.push_back(0.0);
      continue;
    }
    const auto hit = std::count_if(records.begin(), records.end(),
                                   [t](const RunRecord& r) { return r.best_accuracy < t; });
    out.push_back(100.0 * static_cast<double>(hit) / static_cast<double>(records.size()));
  }
  return out;
}

std::vector<double> default_profile_thresholds() {
  std::vector<double> out;
  for (int k = 0; k <= 48; ++k) out.push_back(std::pow(10.0, -12.0 + k / 4.0));
  return out;
}

Profile performance_profile(const std::vector<RunRecord>& records,
                            const std::vector<double>& thresholds) {
  Profile prof;
  prof.thresholds = thresholds;
  std::sort(prof.thresholds.begin(), prof.thresholds.end());
  for (const auto& r : records) {
    if (std::find(prof.methods.begin(), prof.methods.end(), r.method) == prof.methods.end()) {
      prof.methods.push_back(r.method);
    }
  }
  std::sort(prof.methods.begin(), prof.methods.end());
  for (Method m : prof.methods) {
    std::vector<double> acc;
    for (const auto& r : records) {
      if (r.method == m) acc.push_back(r.best_accuracy);
    }
    std::sort(acc.begin(), acc.end());
    std::vector<double> fr;
    for (double t : prof.thresholds) {
      const auto solved = std::upper_bound(acc.begin(), acc.end(), t) - acc.begin();
      fr.push_back(static_cast<double>(solved) / static_cast<double>(acc.size()));
    }
    prof.fractions.push_back(std::move(fr));
  }
  return prof;
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records, bool with_timing) {
  out << "method,N,n,start,lambda,gamma,mu,admissible,best_accuracy,best_penalized,iterations,error";
  if (with_timing) out << ",wall_seconds";
  out << '\n';
  for (const auto& r : records) {
    const bool dr = r.method == Method::DR;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << to_string(r.method) << ',' << r.rows << ',' << r.cols << ',' << r.start << ','
        << (dr ? format_double(r.lambda) : "") << ',' << format_double(r.gamma) << ','
        << (dr ? format_double(r.mu) : "") << ',' << (r.admissible ? 1 : 0) << ','
        << format_double(r.best_accuracy) << ',' << (dr ? format_double(r.best_penalized) : "")
        << ',' << r.iterations << ',' << err;
    if (with_timing) out << ',' << format_double(r.wall_seconds);
    out << '\n';
  }
}

void write_tables_csv(std::ostream& out, const std::vector<RunRecord>& records,
                      const std::vector<double>& thresholds) {
  out << "method,N,n,runs";
  for (double t : thresholds) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "<%.0e", t);
    out << ',' << buf;
  }
  out << '\n';
  auto emit = [&](const std::string& method, const std::string& rows, const std::string& cols,
                  const std::vector<RunRecord>& subset) {
    out << method << ',' << rows << ',' << cols << ',' << subset.size();
    for (double pct : accuracy_table(subset, thresholds)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", pct);
      out << ',' << buf;
    }
    out << '\n';
  };
  std::vector<Method> methods;
  std::vector<std::pair<int, int>> sizes;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    const std::pair<int, int> sz{r.rows, r.cols};
    if (std::find(sizes.begin(), sizes.end(), sz) == sizes.end()) sizes.push_back(sz);
  }
  std::sort(methods.begin(), methods.end());
  std::sort(sizes.begin(), sizes.end());
  for (Method m : methods) {
    std::vector<RunRecord> subset;
    std::copy_if(records.begin(), records.end(), std::back_inserter(subset),
                 [m](const RunRecord& r) { return r.method == m; });
    emit(to_string(m), "all", "all", subset);
    for (const auto& [rows, cols] : sizes) {
      std::vector<RunRecord> sized;
      std::copy_if(subset.begin(), subset.end(), std::back_inserter(sized),
                   [rows = rows, cols = cols](const RunRecord& r) {
                     return r.rows == rows && r.cols == cols;
                   });
      if (!sized.empty()) emit(to_string(m), std::to_string(rows), std::to_string(cols), sized);
    }
  }
}

void write_profile_csv(std::ostream& out, const Profile& profile) {
  out << "threshold";
  for (Method m : profile.methods) out << ',' << to_string(m);
  out << '\n';
  for (std::size_t t = 0; t < profile.thresholds.size(); ++t) {
    out << format_double(profile.thresholds[t]);
    for (std::size_t m = 0; m < profile.methods.size(); ++m) {
      out << ',' << format_double(profile.fractions[m][t]);
    }
    out << '\n';
  }
}

BenchConfig config_from_json(const std::string& text) {
  BenchConfig c;
  try {
    const json j = json::parse(text);
    if (j.contains("sizes")) {
      c.sizes.clear();
      for (const auto& s : j.at("sizes")) c.sizes.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    }
    c.num_starts = j.value("starts", c.num_starts);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.target_accuracy = j.value("target", c.target_accuracy);
    if (j.contains("mu")) {
      const auto& mu = j.at("mu");
      if (mu.is_number()) {
        c.mu_fixed = mu.get<double>();
      } else if (mu.get<std::string>() != "sqrt(N)/2") {
        throw FormatError("config: mu must be a number or \"sqrt(N)/2\"");
      }
    }
    if (j.contains("lambda_grid")) {
      const auto& lg = j.at("lambda_grid");
      if (lg.is_array()) {
        c.lambda_grid = lg.get<std::vector<double>>();
      } else {
        c.lambda_grid = linspace(lg.at("lo").get<double>(), lg.at("hi").get<double>(),
                                 lg.at("count").get<int>());
      }
    }
    if (j.contains("gamma")) {
      const auto& g = j.at("gamma");
      c.gamma_rule.count = g.value("count", c.gamma_rule.count);
      c.gamma_rule.lo = g.value("lo", c.gamma_rule.lo);
      c.gamma_rule.hi_fraction = g.value("hi_fraction", c.gamma_rule.hi_fraction);
    }
    if (j.contains("stepsizes")) {
      const auto& st = j.at("stepsizes");
      c.stepsize_count = st.value("count", c.stepsize_count);
      c.stepsize_lo = st.value("lo", c.stepsize_lo);
      c.stepsize_hi = st.value("hi", c.stepsize_hi);
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("thresholds")) c.table_thresholds = j.at("thresholds").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const BenchConfig& c) {
  json j;
  j["sizes"] = json::array();
  for (const auto& [rows, cols] : c.sizes) j["sizes"].push_back({rows, cols});
  j["starts"] = c.num_starts;
  j["max_iter"] = c.max_iter;
  j["target"] = c.target_accuracy;
  if (c.mu_fixed) {
    j["mu"] = *c.mu_fixed;
  } else {
    j["mu"] = "sqrt(N)/2";
  }
  j["lambda_grid"] = c.lambda_grid;
  j["gamma"] = {{"count", c.gamma_rule.count}, {"lo", c.gamma_rule.lo},
                {"hi_fraction", c.gamma_rule.hi_fraction}};
  j["stepsizes"] = {{"count", c.stepsize_count}, {"lo", c.stepsize_lo}, {"hi", c.stepsize_hi}};
  j["methods"] = json::array();
  for (Method m : c.methods) j["methods"].push_back(to_string(m));
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["thresholds"] = c.table_thresholds;
  return j.dump(2);
}

}  // namespace wcdrs::bench
