#pragma once

// Many-start experiment harness: hitting times, engine comparisons and CSV
// emission.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "qmcsa/anneal.hpp"
#include "qmcsa/detail/format.hpp"
#include "qmcsa/errors.hpp"
#include "qmcsa/kernels.hpp"
#include "qmcsa/objectives.hpp"
#include "qmcsa/rng.hpp"
#include "qmcsa/spatial.hpp"

namespace qmcsa {

/// First n with -phi(x^n) < threshold (the minimized objective crosses the
/// threshold), or nullopt if it never does.
inline std::optional<std::uint64_t> hitting_time(const Trace& trace, double threshold) {
  for (std::uint64_t n = 0; n < trace.objective_values.size(); ++n)
    if (-trace.objective_values[n] < threshold) return n;
  return std::nullopt;
}

/// First n with ||x^n - center||_inf < radius. Needs recorded states.
inline std::optional<std::uint64_t> hitting_time_ball(const Trace& trace, std::span<const double> center, double radius) {
  for (std::uint64_t n = 0; n <= trace.iterations(); ++n) {
    const auto x = trace.state(n);
    double dist = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) dist = std::max(dist, std::abs(x[j] - center[j]));
    if (dist < radius) return n;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Problems

/// An objective together with its kernel family (parameterized by the step
/// size sigma) and its law for starting points.
struct BenchProblem {
  std::string id;
  Objective objective;
  std::function<ProductKernel(double sigma)> kernel_for;
  std::function<std::vector<double>(Rng&)> sample_start;
  std::vector<double> optimum;  // known minimizer, empty when unknown
};

/// Toy problem on [-1,1]^2: both coordinates use `family` with scale sigma,
/// starts uniform on the box.
inline BenchProblem make_toy_problem(KernelFamily family) {
  return BenchProblem{
      "toy",
      make_toy_objective(),
      [family](double sigma) { return ProductKernel::uniform(2, family, sigma, Support{-1.0, 1.0}); },
      [](Rng& rng) { return std::vector<double>{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}; },
      {0.0, 0.0}};
}

/// Variogram problem over (phi1, phi2, z). Kernel scales are
/// sigma * (0.1, 0.1, 0.5 sd_1, ..., 0.5 sd_d1) with sd_i the standard
/// deviation of the observations at location i; phi1, phi2 live on [0, inf).
/// Starts: phi1, phi2 ~ U(0, 2), z_i ~ N(0, 1).
inline BenchProblem make_spatial_problem(const SpatialDataset& ds, double lambda,
                                         KernelFamily family = KernelFamily::Cauchy) {
  const auto sd = ds.location_sd();
  const std::size_t d1 = ds.d1();
  auto kernel_for = [sd, family](double sigma) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<KernelComponent> comps;
    comps.push_back({family, sigma * 0.1, Support{0.0, inf}});
    comps.push_back({family, sigma * 0.1, Support{0.0, inf}});
    for (const double s : sd) comps.push_back({family, sigma * 0.5 * s, Support{-inf, inf}});
    return ProductKernel(std::move(comps));
  };
  auto sample_start = [d1](Rng& rng) {
    std::vector<double> x(d1 + 2);
    x[0] = rng.uniform(0.0, 2.0);
    x[1] = rng.uniform(0.0, 2.0);
    for (std::size_t i = 0; i < d1; ++i) x[i + 2] = rng.normal();
    return x;
  };
  return BenchProblem{"spatial", make_spatial_objective(ds.locations2d, spatial_dispersion_matrix(ds.observations), lambda),
                      std::move(kernel_for), std::move(sample_start), {}};
}

// ---------------------------------------------------------------------------
// Specification and results

struct EngineEntry {
  std::string label;  // e.g. "qmc-sa"
  EngineConfig config;
  Cooling cooling;
};

struct BenchmarkSpec {
  BenchProblem problem;
  std::vector<EngineEntry> engines;
  std::vector<double> sigmas;
  std::size_t starts = 100;
  std::uint64_t iterations = 1u << 14;
  double threshold = 1e-5;
  std::optional<double> ball_radius;  // use the ball criterion around problem.optimum instead
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (starts < 1) throw ConfigError("bench.starts: must be >= 1");
    if (iterations < 1) throw ConfigError("bench.iterations: must be >= 1");
    if (engines.empty()) throw ConfigError("bench.engines: at least one engine is required");
    if (sigmas.empty()) throw ConfigError("bench.sigmas: at least one step size is required");
    for (const double s : sigmas)
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("bench.sigmas: step sizes must be > 0");
    if (ball_radius && problem.optimum.empty()) throw ConfigError("bench.ball_radius: problem has no known optimum");
  }
};

struct BenchmarkRow {
  std::string engine;
  double sigma = 0.0;
  std::string schedule;
  std::size_t start = 0;
  std::optional<std::uint64_t> hit;  // nullopt: censored at N
  double final_value = 0.0;          // best (minimized) objective value over the run
};

struct Aggregate {
  std::string engine;
  double sigma = 0.0;
  std::string schedule;
  double median = std::nan("");  // over uncensored hitting times
  double q1 = std::nan("");
  double q3 = std::nan("");
  double success_rate = 0.0;
  double final_median = std::nan("");
  std::size_t runs = 0;
};

struct BenchmarkResult {
  std::uint64_t iterations = 0;
  std::vector<BenchmarkRow> rows;
  std::vector<Aggregate> aggregates;
};

// ---------------------------------------------------------------------------
// Statistics

/// Median with the midpoint rule for even counts. Input must be nonempty.
inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

/// Quartiles as medians of the lower and upper halves; for odd counts the
/// middle element belongs to neither half (Tukey's hinges without it).
inline std::pair<double, double> quartiles_of(std::vector<double> v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  if (v.size() == 1) return {v[0], v[0]};
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  std::vector<double> lower(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k / 2));
  std::vector<double> upper(v.begin() + static_cast<std::ptrdiff_t>((k + 1) / 2), v.end());
  return {median_of(std::move(lower)), median_of(std::move(upper))};
}

/// Aggregates per (engine, sigma, schedule), in order of first appearance.
/// Censored rows count in the success-rate denominator only.
inline std::vector<Aggregate> compute_aggregates(const std::vector<BenchmarkRow>& rows) {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> hits, finals;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.engine == r.engine && a.sigma == r.sigma && a.schedule == r.schedule;
    });
    std::size_t g;
    if (it == out.end()) {
      Aggregate a;
      a.engine = r.engine;
      a.sigma = r.sigma;
      a.schedule = r.schedule;
      out.push_back(a);
      hits.emplace_back();
      finals.emplace_back();
      g = out.size() - 1;
    } else {
      g = static_cast<std::size_t>(it - out.begin());
    }
    ++out[g].runs;
    finals[g].push_back(r.final_value);
    if (r.hit) hits[g].push_back(static_cast<double>(*r.hit));
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    auto& a = out[g];
    a.success_rate = static_cast<double>(hits[g].size()) / static_cast<double>(a.runs);
    a.median = median_of(hits[g]);
    std::tie(a.q1, a.q3) = quartiles_of(hits[g]);
    a.final_median = median_of(finals[g]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runner

/// Runs every engine once per (sigma, start). Starting points come from
/// derive_seed(master_seed, start), so adding starts never perturbs earlier
/// ones; engine seeds derive from the start seed. Jobs run on a worker pool
/// and are merged by index, so the result does not depend on scheduling.
inline BenchmarkResult run_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  const auto& prob = spec.problem;
  const std::size_t n_eng = spec.engines.size();
  const std::size_t n_sig = spec.sigmas.size();
  const std::size_t n_start = spec.starts;
  const std::size_t n_jobs = n_eng * n_sig * n_start;

  std::vector<std::vector<double>> starts(n_start);
  for (std::size_t s = 0; s < n_start; ++s) {
    Rng rng(derive_seed(spec.master_seed, s));
    starts[s] = prob.sample_start(rng);
  }
  std::vector<ProductKernel> kernels;
  for (const double sigma : spec.sigmas) kernels.push_back(prob.kernel_for(sigma));

  std::vector<BenchmarkRow> rows(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n_jobs) return;
      const std::size_t s = job % n_start;
      const std::size_t k = (job / n_start) % n_sig;
      const std::size_t e = job / (n_start * n_sig);
      const auto& entry = spec.engines[e];
      try {
        EngineConfig cfg = entry.config;
        cfg.iterations = spec.iterations;
        cfg.record_states = spec.ball_radius.has_value();
        const std::uint64_t run_seed = derive_seed(derive_seed(derive_seed(spec.master_seed, s), e + 1), k);
        cfg.rng_seed = derive_seed(run_seed, 0);
        cfg.randomization.rng_seed = derive_seed(run_seed, 1);
        const Trace tr = run_engine(prob.objective, kernels[k], entry.cooling, starts[s], cfg);
        BenchmarkRow row;
        row.engine = entry.label;
        row.sigma = spec.sigmas[k];
        row.schedule = cooling_label(entry.cooling);
        row.start = s;
        row.hit = spec.ball_radius ? hitting_time_ball(tr, prob.optimum, *spec.ball_radius)
                                   : hitting_time(tr, spec.threshold);
        row.final_value = prob.objective.reported(tr.best_value);
        rows[job] = std::move(row);
      } catch (...) {
        errors[job] = std::current_exception();
        failed = true;
      }
    }
  };

  unsigned n_threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_jobs));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(work);
    work();
  }

  for (std::size_t job = 0; job < n_jobs; ++job) {
    if (!errors[job]) continue;
    const std::size_t s = job % n_start;
    const std::size_t e = job / (n_start * n_sig);
    try {
      std::rethrow_exception(errors[job]);
    } catch (const std::exception& ex) {
      throw RunAborted("start " + std::to_string(s) + " (engine " + spec.engines[e].label + "): " + ex.what());
    }
  }

  BenchmarkResult result;
  result.iterations = spec.iterations;
  result.rows = std::move(rows);
  result.aggregates = compute_aggregates(result.rows);
  return result;
}

// ---------------------------------------------------------------------------
// Output

/// `engine,sigma,schedule,start,hit_iter,censored,final_value`; censored rows
/// carry hit_iter = N.
inline void write_rows_csv(std::ostream& out, const BenchmarkResult& result) {
  using detail::format_double;
  out << "engine,sigma,schedule,start,hit_iter,censored,final_value\n";
  for (const auto& r : result.rows) {
    out << r.engine << ',' << format_double(r.sigma) << ",\"" << r.schedule << "\"," << r.start << ','
        << (r.hit ? *r.hit : result.iterations) << ',' << (r.hit ? 0 : 1) << ',' << format_double(r.final_value) << '\n';
  }
}

/// `engine,sigma,schedule,median,q1,q3,success_rate`; location statistics
/// are `nan` when no run succeeded.
inline void write_aggregates_csv(std::ostream& out, const BenchmarkResult& result) {
  using detail::format_double;
  out << "engine,sigma,schedule,median,q1,q3,success_rate\n";
  for (const auto& a : result.aggregates) {
    out << a.engine << ',' << format_double(a.sigma) << ",\"" << a.schedule << "\"," << format_double(a.median) << ','
        << format_double(a.q1) << ',' << format_double(a.q3) << ',' << format_double(a.success_rate) << '\n';
  }
}

inline std::string summary_table(const BenchmarkResult& result) {
  std::ostringstream os;
  os << "engine      sigma     schedule                      runs  success  median_hit  q1        q3        "
        "median_best\n";
  char buf[256];
  for (const auto& a : result.aggregates) {
    std::snprintf(buf, sizeof buf, "%-11s %-9s %-29s %-5zu %-8.3f %-11.6g %-9.6g %-9.6g %.6g\n", a.engine.c_str(),
                  detail::format_double(a.sigma).c_str(), a.schedule.c_str(), a.runs, a.success_rate, a.median, a.q1,
                  a.q3, a.final_median);
    os << buf;
  }
  return os.str();
}

/// Writes both CSV files and returns the text summary.
inline std::string summarize(const BenchmarkResult& result, const std::string& rows_path,
                             const std::string& aggregates_path) {
  if (result.rows.empty()) throw std::invalid_argument("summarize: empty result");
  auto write = [](const std::string& path, auto&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
  };
  write(rows_path, [&](std::ostream& o) { write_rows_csv(o, result); });
  write(aggregates_path, [&](std::ostream& o) { write_aggregates_csv(o, result); });
  return summary_table(result);
}

}  // namespace qmcsa
