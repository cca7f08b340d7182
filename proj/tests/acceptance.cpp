// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qmcsa/anneal.hpp"
#include "qmcsa/bench.hpp"
#include "qmcsa/kernels.hpp"
#include "qmcsa/lds.hpp"
#include "qmcsa/objectives.hpp"
#include "qmcsa/spatial.hpp"

using namespace qmcsa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Aggregate& find_agg(const BenchmarkResult& r, const std::string& engine, double sigma) {
  for (const auto& a : r.aggregates)
    if (a.engine == engine && a.sigma == sigma) return a;
  throw std::logic_error("missing aggregate for " + engine);
}

BenchmarkSpec toy_bench(KernelFamily fam, double sigma, std::size_t starts, std::uint64_t n, std::uint64_t seed) {
  BenchmarkSpec spec{.problem = make_toy_problem(fam),
                     .engines = {},
                     .sigmas = {sigma},
                     .starts = starts,
                     .iterations = n,
                     .threshold = 1e-5,
                     .ball_radius = std::nullopt,
                     .master_seed = seed,
                     .threads = 0};
  EngineConfig qmc, mc;
  mc.engine = EngineKind::McSa;
  spec.engines.push_back({"qmc-sa", qmc, Schedule::t1(200.0, 0.001)});
  spec.engines.push_back({"mc-sa", mc, Schedule::t1(200.0, 0.001)});
  return spec;
}

std::string csv_of(const BenchmarkResult& r) {
  std::ostringstream os;
  write_rows_csv(os, r);
  write_aggregates_csv(os, r);
  return os.str();
}

// 1. Net property of Sobol' blocks.
Outcome net_property() {
  std::size_t checked = 0, failed = 0;
  for (std::size_t s = 1; s <= 3; ++s) {
    const unsigned t = SobolGenerator(s).t_value();
    DigitalSequenceConfig cfg;
    cfg.dimension = s;
    for (unsigned m = t; m <= 8; ++m)
      for (std::uint64_t a = 0; a <= 3; ++a) {
        ++checked;
        if (!verify_net(generate_points(cfg, a << m, std::uint64_t{1} << m), 2, t, m, s).is_net) ++failed;
      }
  }
  return {failed == 0, fmt("%zu blocks (s=1..3, m<=8, a<=3, t=0,0,1), %zu failures", checked, failed)};
}

// 2. Rejection guard over QMC-SA toy traces.
Outcome rejection_guard_bulk() {
  const auto obj = make_toy_objective();
  std::size_t runs = 0, violations = 0;
  for (auto fam : {KernelFamily::Cauchy, KernelFamily::Gaussian}) {
    const double sigma = fam == KernelFamily::Cauchy ? 10.0 : 0.01;
    const auto kernel = ProductKernel::uniform(2, fam, sigma, Support{-1.0, 1.0});
    for (const auto& sched : {Schedule::t1(200.0), Schedule::t2(1.0), Schedule::t3(1.0)}) {
      for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(derive_seed(2718, s));
        const std::vector<double> x0{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        EngineConfig cfg;
        cfg.iterations = 1u << 12;
        cfg.record_states = false;
        violations += rejection_guard(qmc_sa_run(obj, kernel, sched, x0, cfg), 2).size();
        ++runs;
      }
    }
  }
  return {violations == 0, fmt("%zu runs x 4096 iterations (2 kernels x T1/T2/T3 x 100 starts), %zu violations", runs,
                               violations)};
}

// 3. Toy benchmark, Cauchy sigma = 10.
Outcome toy_cauchy() {
  const auto res = run_benchmark(toy_bench(KernelFamily::Cauchy, 10.0, 100, 1u << 17, 20240601));
  const auto& q = find_agg(res, "qmc-sa", 10.0);
  const auto& m = find_agg(res, "mc-sa", 10.0);
  std::map<std::uint64_t, int> counts;
  for (const auto& r : res.rows)
    if (r.engine == "qmc-sa" && r.hit) ++counts[*r.hit];
  int repeated = 0;
  for (const auto& [h, c] : counts) repeated = std::max(repeated, c);
  const bool pass = q.success_rate == 1.0 && q.median <= 1000.0 && q.median <= m.median;
  return {pass, fmt("QMC-SA success %.2f median %g (q1 %g, q3 %g); MC-SA success %.2f median %g; "
                    "largest group of starts sharing a QMC-SA hitting time: %d",
                    q.success_rate, q.median, q.q1, q.q3, m.success_rate, m.median, repeated)};
}

// 4. Toy benchmark, Gaussian sigma = 0.01.
Outcome toy_gaussian() {
  const auto res = run_benchmark(toy_bench(KernelFamily::Gaussian, 0.01, 100, 1u << 14, 20240602));
  const auto& q = find_agg(res, "qmc-sa", 0.01);
  const auto& m = find_agg(res, "mc-sa", 0.01);
  return {q.success_rate - m.success_rate <= 0.20 + 1e-12,
          fmt("QMC-SA success %.2f, MC-SA success %.2f (gap %+.2f, bound +0.20)", q.success_rate, m.success_rate,
              q.success_rate - m.success_rate)};
}

// 5. Spatial benchmark at desk scale.
Outcome spatial() {
  const auto ds = make_dataset(10, 50, 1.0, 1.0, EllipsoidAxes{}, 42);
  const std::vector<double> sigmas{0.005, 0.01, 0.03, 0.05};
  BenchmarkSpec spec{.problem = make_spatial_problem(ds, 0.1, KernelFamily::Cauchy),
                     .engines = {},
                     .sigmas = sigmas,
                     .starts = 50,
                     .iterations = 1u << 13,
                     .threshold = 1e-5,
                     .ball_radius = std::nullopt,
                     .master_seed = 20240603,
                     .threads = 0};
  EngineConfig qmc, mc;
  mc.engine = EngineKind::McSa;
  spec.engines.push_back({"qmc-sa", qmc, Schedule::t4(0.1, 100.0)});
  spec.engines.push_back({"mc-sa", mc, Schedule::t4(0.1, 100.0)});
  const auto res = run_benchmark(spec);
  bool pass = true;
  std::string detail;
  for (const double s : sigmas) {
    const auto& q = find_agg(res, "qmc-sa", s);
    const auto& m = find_agg(res, "mc-sa", s);
    pass = pass && q.final_median < m.final_median;
    detail += fmt("%ssigma=%g: QMC-SA median %.6g vs MC-SA %.6g", detail.empty() ? "" : "; ", s, q.final_median,
                  m.final_median);
  }
  return {pass, detail};
}

// 6. Dispersion decay of Sobol' points in d = 2.
Outcome dispersion_decay() {
  DigitalSequenceConfig cfg;
  cfg.dimension = 2;
  std::vector<double> lx, ly;
  std::string values;
  for (int k = 2; k <= 5; ++k) {
    const std::uint64_t n = std::uint64_t{1} << (2 * k);
    const double d = dispersion_estimate(generate_points(cfg, 0, n), 1025);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(d));
    values += fmt("%s%g", values.empty() ? "" : ", ", d);
  }
  const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= -0.7 && slope <= -0.3, fmt("slope %.4f over N=16..1024 (dispersions %s)", slope, values.c_str())};
}

// 7. Inverse-CDF round trip.
Outcome roundtrip() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  int cases = 0;
  for (auto fam : {KernelFamily::Cauchy, KernelFamily::Gaussian})
    for (const Support sup : {Support{-1.0, 1.0}, Support{0.0, inf}, Support{-inf, 2.0}})
      for (const double loc : {-0.5, 0.0, 0.9})
        for (const double scale : {0.01, 1.0, 10.0}) {
          if (loc < sup.lower || loc > sup.upper) continue;  // proposals are centred on feasible states
          const TruncatedDist d(fam, loc, scale, sup);
          ++cases;
          for (int k = 0; k <= 1000; ++k) {
            const double u = k / 1000.0;
            worst = std::max(worst, std::abs(d.cdf(d.inverse_cdf(u)) - u));
          }
        }
  return {worst <= 1e-10, fmt("max |F(F^-1(u)) - u| = %.3g over %d distributions x 1001 points", worst, cases)};
}

// 8. Summability witness for T1.
Outcome summability() {
  const auto s = Schedule::t1(200.0, 0.001);
  double head = 0.0, tail = 0.0;
  for (std::uint64_t n = 2; n <= 100000; ++n) head += temperature(s, n) * std::log(static_cast<double>(n));
  for (std::uint64_t n = 100000; n <= 200000; ++n) tail += temperature(s, n) * std::log(static_cast<double>(n));
  const double ratio = tail / head;
  return {ratio <= 0.01, fmt("tail %.6g / head %.6g = %.4f (bound 0.01)", tail, head, ratio)};
}

// 9. Threshold accepting on the toy function.
Outcome threshold_accepting() {
  const auto obj = make_toy_objective();
  const auto kernel = ProductKernel::uniform(2, KernelFamily::Cauchy, 10.0, Support{-1.0, 1.0});
  const auto th = ThresholdSchedule::quadratic(1.0);
  std::vector<double> finals, bests;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(derive_seed(20240604, s));
    const std::vector<double> x0{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    EngineConfig cfg;
    cfg.engine = EngineKind::ThresholdAccepting;
    cfg.iterations = 1u << 15;
    cfg.record_states = false;
    const auto tr = ta_run(obj, kernel, th, x0, cfg);
    finals.push_back(obj.reported(tr.objective_values.back()));
    bests.push_back(obj.reported(tr.best_value));
  }
  const double med = median_of(finals);
  return {med <= 1e-3, fmt("median final value %.3g (median best %.3g) over 100 starts", med, median_of(bests))};
}

// 10. Determinism.
Outcome determinism() {
  const auto obj = make_toy_objective();
  const auto kernel = ProductKernel::uniform(2, KernelFamily::Cauchy, 10.0, Support{-1.0, 1.0});
  const std::vector<double> x0{0.7, -0.4};
  EngineConfig cfg;
  cfg.iterations = 1u << 14;
  auto trace_text = [&](EngineKind e, const Cooling& c) {
    auto cc = cfg;
    cc.engine = e;
    std::ostringstream os;
    write_trace_csv(os, run_engine(obj, kernel, c, x0, cc), true);
    return os.str();
  };
  const bool qmc = trace_text(EngineKind::QmcSa, Schedule::t1(200.0)) == trace_text(EngineKind::QmcSa, Schedule::t1(200.0));
  const bool ta = trace_text(EngineKind::ThresholdAccepting, ThresholdSchedule::quadratic(1.0)) ==
                  trace_text(EngineKind::ThresholdAccepting, ThresholdSchedule::quadratic(1.0));
  auto spec = toy_bench(KernelFamily::Cauchy, 10.0, 20, 4096, 77);
  spec.threads = 1;
  const std::string a = csv_of(run_benchmark(spec));
  spec.threads = 3;
  const std::string b = csv_of(run_benchmark(spec));
  const std::string c = csv_of(run_benchmark(spec));
  const bool bench = a == b && b == c;
  return {qmc && ta && bench, fmt("QMC-SA trace %s, TA trace %s, seeded benchmark (1 and 3 threads) %s",
                                  qmc ? "identical" : "DIFFERS", ta ? "identical" : "DIFFERS",
                                  bench ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "net property of Sobol' blocks", 10.0, net_property},
      {2, "rejection guard on 100 QMC-SA toy runs per kernel/schedule", 60.0, rejection_guard_bulk},
      {3, "toy Cauchy sigma=10, T1(200), S=100, N=2^17", 1200.0, toy_cauchy},
      {4, "toy Gaussian sigma=0.01, light-tail degradation", 600.0, toy_gaussian},
      {5, "spatial d1=10, M=50, T4(0.1,100), S=50, N=2^13", 1200.0, spatial},
      {6, "Sobol' dispersion decay in d=2", 60.0, dispersion_decay},
      {7, "inverse-CDF round trip", 1.0, roundtrip},
      {8, "T1 summability witness (tail <= 1% of head)", 1.0, summability},
      {9, "threshold accepting l_n = n^2, toy, S=100, N=2^15", 600.0, threshold_accepting},
      {10, "determinism of R=inf runs and seeded benchmarks", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %d: %s | %s | %.2fs (budget %gs)%s\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
