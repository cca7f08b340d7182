#pragma once

// Command implementations behind the `qmcsa` tool. Each command returns a
// process exit code: 0 success, 1 runtime failure, 2 usage/config error.
//
// Run and bench configs share these sections:
//
//   [objective]  id = toy | spatial, dataset = <path>, lambda = <real>
//   [data]       d1, M, phi1, phi2, axes = a,b,c, seed   (spatial without a dataset file)
//   [kernel]     family = cauchy | gaussian, scale, lower, upper, sigma
//   [schedule]   family = T1 | T2 | T3 | T4 | custom, T0, epsilon, C, table
//   [threshold]  growth = quadratic | custom, l0, table
//   [engine]     engine = qmc-sa | ta | mc-sa, iterations, r_digits = <int> | inf,
//                randomization = truncation | proxy, acceptance = vdc | iid,
//                acceptance_base, gray_zone = accept | reject, seed
//
// run adds [start] x0 and [output] trace, states; bench adds [bench].

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qmcsa/anneal.hpp"
#include "qmcsa/bench.hpp"
#include "qmcsa/config.hpp"
#include "qmcsa/detail/format.hpp"
#include "qmcsa/errors.hpp"
#include "qmcsa/kernels.hpp"
#include "qmcsa/lds.hpp"
#include "qmcsa/objectives.hpp"
#include "qmcsa/rng.hpp"
#include "qmcsa/spatial.hpp"

namespace qmcsa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

using qmcsa::detail::format_double;

inline KernelFamily parse_family(ConfigReader& r, const std::string& key) {
  const auto v = r.text(key).value_or("cauchy");
  if (v == "cauchy") return KernelFamily::Cauchy;
  if (v == "gaussian") return KernelFamily::Gaussian;
  throw r.error(key, "expected cauchy or gaussian, got '" + v + "'");
}

inline EngineKind parse_engine_kind(const std::string& v, const std::string& key) {
  if (v == "qmc-sa") return EngineKind::QmcSa;
  if (v == "ta") return EngineKind::ThresholdAccepting;
  if (v == "mc-sa") return EngineKind::McSa;
  throw ConfigError(key + ": unknown engine '" + v + "' (expected qmc-sa, ta or mc-sa)");
}

inline double positive(ConfigReader& r, const std::string& key, double fallback) {
  const double v = r.real_or(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw r.error(key, "must be > 0");
  return v;
}

/// Spatial dataset from [objective] dataset or generated from [data].
inline SpatialDataset load_spatial_data(ConfigReader& r) {
  if (const auto path = r.text("objective.dataset")) {
    for (const char* k : {"data.d1", "data.M", "data.phi1", "data.phi2", "data.axes", "data.seed"})
      if (r.has(k)) throw r.error(k, "conflicts with objective.dataset");
    return load_dataset(*path);
  }
  const auto d1 = r.integer("data.d1").value_or(10);
  if (d1 < 2) throw r.error("data.d1", "need at least 2 locations");
  const auto m = r.integer("data.M").value_or(50);
  if (m < 2) throw r.error("data.M", "need at least 2 replicates");
  const double phi1 = positive(r, "data.phi1", 1.0);
  const double phi2 = positive(r, "data.phi2", 1.0);
  EllipsoidAxes axes;
  if (const auto ax = r.real_list("data.axes")) {
    if (ax->size() != 3) throw r.error("data.axes", "expected three semi-axes a,b,c");
    axes = {(*ax)[0], (*ax)[1], (*ax)[2]};
    for (const double a : *ax)
      if (!(a > 0.0) || !std::isfinite(a)) throw r.error("data.axes", "semi-axes must be > 0");
  }
  const auto seed = r.integer("data.seed");
  if (!seed) throw ConfigError("data.seed: required when generating a dataset");
  return make_dataset(d1, m, phi1, phi2, axes, *seed);
}

/// Objective plus its default kernel family and start law.
inline BenchProblem load_problem(ConfigReader& r, KernelFamily family) {
  const auto id = r.text("objective.id");
  if (!id) throw ConfigError("objective.id: required key is missing");
  if (*id == "toy") {
    for (const char* k : {"objective.dataset", "objective.lambda"})
      if (r.has(k)) throw r.error(k, "not used by the toy objective");
    return make_toy_problem(family);
  }
  if (*id == "spatial") {
    const double lambda = positive(r, "objective.lambda", 0.1);
    return make_spatial_problem(load_spatial_data(r), lambda, family);
  }
  throw r.error("objective.id", "unknown objective '" + *id + "' (expected toy or spatial)");
}

/// Expands a scalar or per-coordinate list to d entries.
inline std::vector<double> broadcast(ConfigReader& r, const std::string& key, std::size_t d) {
  auto v = *r.real_list(key);
  if (v.size() == 1) v.assign(d, v[0]);
  if (v.size() != d)
    throw r.error(key, "expected 1 or " + std::to_string(d) + " values, got " + std::to_string(v.size()));
  return v;
}

/// Explicit per-coordinate kernel when kernel.scale is given, otherwise the
/// problem's sigma-scaled kernel (kernel.sigma, default 1).
inline ProductKernel load_kernel(ConfigReader& r, const BenchProblem& prob, KernelFamily family) {
  const std::size_t d = prob.objective.dimension();
  const bool explicit_scale = r.has("kernel.scale");
  if (!explicit_scale) {
    for (const char* k : {"kernel.lower", "kernel.upper"})
      if (r.has(k)) throw r.error(k, "requires kernel.scale");
    const double sigma = positive(r, "kernel.sigma", 1.0);
    return prob.kernel_for(sigma);
  }
  if (r.has("kernel.sigma")) throw r.error("kernel.sigma", "conflicts with kernel.scale");
  const auto scale = broadcast(r, "kernel.scale", d);
  std::vector<double> lower(prob.objective.lower().begin(), prob.objective.lower().end());
  std::vector<double> upper(prob.objective.upper().begin(), prob.objective.upper().end());
  if (r.has("kernel.lower")) lower = broadcast(r, "kernel.lower", d);
  if (r.has("kernel.upper")) upper = broadcast(r, "kernel.upper", d);
  std::vector<KernelComponent> comps;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(scale[i] > 0.0) || !std::isfinite(scale[i])) throw r.error("kernel.scale", "must be > 0");
    if (!(lower[i] < upper[i])) throw r.error("kernel.lower", "must be below kernel.upper");
    if (lower[i] < prob.objective.lower()[i] || upper[i] > prob.objective.upper()[i])
      throw r.error("kernel.lower", "support must lie inside the objective domain");
    comps.push_back({family, scale[i], Support{lower[i], upper[i]}});
  }
  return ProductKernel(std::move(comps));
}

inline Schedule load_schedule(ConfigReader& r) {
  const auto fam = r.text("schedule.family").value_or("T1");
  Schedule s;
  if (fam == "custom") {
    const auto table = r.real_list("schedule.table");
    if (!table) throw ConfigError("schedule.table: required for a custom schedule");
    s = Schedule::custom(*table);
  } else {
    const double t0 = r.real_or("schedule.T0", 1.0);
    if (fam == "T1") s = Schedule::t1(t0, r.real_or("schedule.epsilon", 0.001));
    else if (fam == "T2") s = Schedule::t2(t0);
    else if (fam == "T3") s = Schedule::t3(t0);
    else if (fam == "T4") s = Schedule::t4(t0, r.real_or("schedule.C", 100.0));
    else throw r.error("schedule.family", "expected T1, T2, T3, T4 or custom, got '" + fam + "'");
  }
  for (const char* k : {"schedule.T0", "schedule.epsilon", "schedule.C", "schedule.table"}) r.text(k);
  s.validate();
  return s;
}

inline ThresholdSchedule load_thresholds(ConfigReader& r) {
  const auto growth = r.text("threshold.growth").value_or("quadratic");
  ThresholdSchedule t;
  if (growth == "quadratic") {
    t = ThresholdSchedule::quadratic(r.real_or("threshold.l0", 1.0));
  } else if (growth == "custom") {
    const auto table = r.real_list("threshold.table");
    if (!table) throw ConfigError("threshold.table: required for custom thresholds");
    t = ThresholdSchedule::custom(*table);
  } else {
    throw r.error("threshold.growth", "expected quadratic or custom, got '" + growth + "'");
  }
  r.text("threshold.l0");
  r.text("threshold.table");
  t.validate();
  return t;
}

/// [engine] minus the seed, which callers resolve.
inline EngineConfig load_engine(ConfigReader& r) {
  EngineConfig c;
  c.engine = parse_engine_kind(r.text("engine.engine").value_or("qmc-sa"), "engine.engine");
  if (const auto n = r.integer("engine.iterations")) c.iterations = *n;
  if (const auto rd = r.text("engine.r_digits"); rd && *rd != "inf") {
    unsigned v;
    if (!qmcsa::detail::parse_integer(*rd, v)) throw r.error("engine.r_digits", "expected a nonnegative integer or inf");
    c.randomization.r_digits = DigitCount::finite(v);
  }
  const auto mode = r.text("engine.randomization").value_or("truncation");
  if (mode == "truncation") c.randomization.mode = RandomizationMode::DigitTruncation;
  else if (mode == "proxy") c.randomization.mode = RandomizationMode::AdditiveProxy;
  else throw r.error("engine.randomization", "expected truncation or proxy");
  const auto acc = r.text("engine.acceptance").value_or("vdc");
  if (acc == "vdc") c.acceptance = AcceptanceSequence::VanDerCorput;
  else if (acc == "iid") c.acceptance = AcceptanceSequence::IidUniform;
  else throw r.error("engine.acceptance", "expected vdc or iid");
  if (const auto b = r.integer("engine.acceptance_base")) {
    if (*b < 2 || *b > 1024) throw r.error("engine.acceptance_base", "must be in [2, 1024]");
    c.acceptance_base = static_cast<unsigned>(*b);
  }
  const auto gz = r.text("engine.gray_zone").value_or("accept");
  if (gz == "accept") c.gray_zone = GrayZoneRule::AlwaysAccept;
  else if (gz == "reject") c.gray_zone = GrayZoneRule::AlwaysReject;
  else throw r.error("engine.gray_zone", "expected accept or reject");
  c.validate();
  return c;
}

/// Parses both cooling sections and returns the one the engine uses.
inline Cooling load_cooling(ConfigReader& r, EngineKind engine) {
  Schedule s = load_schedule(r);
  ThresholdSchedule t = load_thresholds(r);
  if (engine == EngineKind::ThresholdAccepting) return t;
  return s;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RunAborted& e) {
    err << "run aborted: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run

struct RunOverrides {
  std::optional<std::string> engine;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> iterations;
  std::optional<std::string> trace;
  std::vector<std::pair<std::string, std::string>> set;  // section.key = value

  void apply(IniDocument& doc) const {
    for (const auto& [k, v] : set) doc.set(k, v);
    if (engine) doc.set("engine.engine", *engine);
    if (seed) doc.set("engine.seed", std::to_string(*seed));
    if (iterations) doc.set("engine.iterations", std::to_string(*iterations));
    if (trace) doc.set("output.trace", *trace);
  }
};

/// Fully validated single-run configuration.
struct RunConfig {
  BenchProblem problem;
  ProductKernel kernel;
  Cooling cooling;
  EngineConfig engine;
  std::vector<double> x0;
  std::string trace_path;
  bool write_states = false;
};

inline RunConfig load_run_config(const IniDocument& doc) {
  ConfigReader r(doc);
  const auto family = detail::parse_family(r, "kernel.family");
  auto problem = detail::load_problem(r, family);
  auto kernel = detail::load_kernel(r, problem, family);
  EngineConfig engine = detail::load_engine(r);
  auto cooling = detail::load_cooling(r, engine.engine);

  const auto x0 = r.real_list("start.x0");
  const auto seed = r.integer("engine.seed");
  if (!seed && (engine.stochastic() || !x0))
    throw ConfigError("engine.seed: required for stochastic engines and for sampled starting points");
  const std::uint64_t s = seed.value_or(0);
  engine.rng_seed = derive_seed(s, 1);
  engine.randomization.rng_seed = derive_seed(s, 2);

  std::vector<double> start;
  if (x0) {
    start = *x0;
    if (start.size() != problem.objective.dimension())
      throw r.error("start.x0", "expected " + std::to_string(problem.objective.dimension()) + " coordinates");
    if (!kernel.contains(start)) throw r.error("start.x0", "starting point lies outside the kernel support");
  } else {
    Rng rng(derive_seed(s, 0));
    start = problem.sample_start(rng);
  }

  const std::string trace = r.text("output.trace").value_or("trace.csv");
  const bool states = r.boolean("output.states").value_or(false);
  engine.record_states = states;
  r.reject_unknown();
  return RunConfig{std::move(problem), std::move(kernel), std::move(cooling), engine, std::move(start), trace, states};
}

inline int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
                   std::ostream& err) {
  return detail::guarded(err, [&] {
    IniDocument doc = IniDocument::load(config_path);
    overrides.apply(doc);
    const RunConfig cfg = load_run_config(doc);

    std::ofstream trace_out(cfg.trace_path, std::ios::binary);
    if (!trace_out) throw std::runtime_error("cannot open trace file '" + cfg.trace_path + "' for writing");

    const auto t_start = std::chrono::steady_clock::now();
    const Trace tr = run_engine(cfg.problem.objective, cfg.kernel, cfg.cooling, cfg.x0, cfg.engine);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    write_trace_csv(trace_out, tr, cfg.write_states);
    trace_out.flush();
    if (!trace_out) throw std::runtime_error("write failed for '" + cfg.trace_path + "'");

    std::uint64_t accepted = 0;
    for (std::uint64_t n = 1; n <= tr.iterations(); ++n) accepted += tr.accepted[n];
    out << "engine=" << to_string(cfg.engine.engine) << " objective=" << cfg.problem.id
        << " best=" << detail::format_double(cfg.problem.objective.reported(tr.best_value))
        << " best_iter=" << tr.best_index << " iterations=" << tr.iterations() << " accepted=" << accepted
        << " wall_s=" << wall << " trace=" << cfg.trace_path << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// bench

struct BenchConfig {
  BenchmarkSpec spec;
  std::string rows_path;
  std::string aggregates_path;
};

inline BenchConfig load_bench_config(const IniDocument& doc) {
  ConfigReader r(doc);
  const auto family = detail::parse_family(r, "kernel.family");
  if (r.has("kernel.scale") || r.has("kernel.lower") || r.has("kernel.upper") || r.has("kernel.sigma"))
    throw ConfigError("kernel: bench uses bench.sigmas and the objective's own supports; remove kernel.scale/lower/upper/sigma");
  auto problem = detail::load_problem(r, family);

  const EngineConfig base = detail::load_engine(r);
  const Schedule schedule = detail::load_schedule(r);
  const ThresholdSchedule thresholds = detail::load_thresholds(r);
  if (r.has("engine.seed")) throw r.error("engine.seed", "bench draws every seed from bench.seed");

  BenchmarkSpec spec{.problem = std::move(problem), .engines = {}, .sigmas = {}, .starts = 100, .iterations = 1u << 14, .threshold = 1e-5, .ball_radius = std::nullopt};
  const auto names = r.list("bench.engines").value_or(std::vector<std::string>{"qmc-sa", "mc-sa"});
  for (const auto& name : names) {
    EngineConfig c = base;
    c.engine = detail::parse_engine_kind(name, "bench.engines");
    Cooling cooling = c.engine == EngineKind::ThresholdAccepting ? Cooling(thresholds) : Cooling(schedule);
    spec.engines.push_back({name, c, cooling});
  }
  spec.sigmas = r.real_list("bench.sigmas").value_or(std::vector<double>{1.0});
  if (const auto s = r.integer("bench.starts")) spec.starts = *s;
  if (const auto n = r.integer("bench.iterations")) spec.iterations = *n;
  if (spec.iterations >= (std::uint64_t{1} << 40)) throw r.error("bench.iterations", "too large");
  spec.threshold = r.real_or("bench.threshold", 1e-5);
  if (const auto rad = r.real("bench.ball_radius")) {
    if (!(*rad > 0.0)) throw r.error("bench.ball_radius", "must be > 0");
    spec.ball_radius = *rad;
  }
  const auto seed = r.integer("bench.seed");
  if (!seed) throw ConfigError("bench.seed: required key is missing");
  spec.master_seed = *seed;
  if (const auto t = r.integer("bench.threads")) spec.threads = static_cast<unsigned>(*t);
  BenchConfig cfg{std::move(spec), r.text("bench.rows").value_or("rows.csv"),
                  r.text("bench.aggregates").value_or("aggregates.csv")};
  r.reject_unknown();
  cfg.spec.validate();
  return cfg;
}

inline int cmd_bench(const std::string& config_path, const std::vector<std::pair<std::string, std::string>>& set,
                     std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    IniDocument doc = IniDocument::load(config_path);
    for (const auto& [k, v] : set) doc.set(k, v);
    const BenchConfig cfg = load_bench_config(doc);
    const BenchmarkResult result = run_benchmark(cfg.spec);
    out << summarize(result, cfg.rows_path, cfg.aggregates_path);
    out << "rows=" << cfg.rows_path << " aggregates=" << cfg.aggregates_path << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// netcheck

struct NetcheckOptions {
  unsigned b = 2;
  unsigned t = 0;
  unsigned m = 6;
  unsigned s = 2;
  std::string generator = "sobol";
  std::uint64_t block = 0;                    // checks points block*b^m .. (block+1)*b^m - 1
  std::optional<std::uint64_t> corrupt;       // index within the block to displace
};

inline constexpr unsigned kNetcheckMaxM = 12;
inline constexpr unsigned kNetcheckMaxS = 4;

inline int cmd_netcheck(const NetcheckOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (o.m > kNetcheckMaxM) throw ConfigError("m: must be <= " + std::to_string(kNetcheckMaxM));
    if (o.s < 1 || o.s > kNetcheckMaxS) throw ConfigError("s: must be in [1, " + std::to_string(kNetcheckMaxS) + "]");
    if (o.t > o.m) throw ConfigError("t: must be <= m");
    if (o.b < 2 || o.b > 16) throw ConfigError("b: must be in [2, 16]");
    DigitalSequenceConfig seq;
    seq.base = o.b;
    seq.dimension = o.s;
    if (o.generator == "sobol") seq.kind = GeneratorKind::Sobol;
    else if (o.generator == "vdc") seq.kind = GeneratorKind::VanDerCorput;
    else throw ConfigError("generator: expected sobol or vdc");
    seq.validate();
    const std::uint64_t size = qmcsa::detail::ipow(o.b, o.m);
    if (o.block > (std::uint64_t{1} << 40) / size) throw ConfigError("block: too large");
    PointSet pts = generate_points(seq, o.block * size, size);
    if (o.corrupt) {
      if (*o.corrupt >= size) throw ConfigError("corrupt: index must be < b^m");
      // Move the point onto its neighbour's cell so one box gains and another loses.
      const auto row = pts.row(static_cast<std::size_t>(*o.corrupt));
      const auto other = pts.row(static_cast<std::size_t>((*o.corrupt + 1) % size));
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = other[j];
    }
    const NetCheckReport rep = verify_net(pts, o.b, o.t, o.m, o.s);
    out << (rep.is_net ? "PASS" : "FAIL") << ": " << o.generator << " points " << o.block * size << ".."
        << (o.block + 1) * size - 1 << " as a (" << o.t << "," << o.m << "," << o.s << ")-net in base " << o.b << '\n';
    if (!rep.is_net && rep.violating_box) {
      const auto& box = *rep.violating_box;
      out << "violating box:";
      for (const auto& [a, d] : box.intervals)
        out << " [" << a << "/" << o.b << "^" << d << ", " << a + 1 << "/" << o.b << "^" << d << ")";
      out << " holds " << box.count << " points, expected " << box.expected << '\n';
    }
    return rep.is_net ? kExitOk : kExitRuntime;
  });
}

// ---------------------------------------------------------------------------
// gendata

struct GendataOptions {
  std::uint64_t d1 = 10;
  std::uint64_t m = 50;
  double phi1 = 1.0;
  double phi2 = 1.0;
  std::vector<double> axes{1.0, 1.0, 0.5};
  std::optional<std::uint64_t> seed;
  std::string out_path = "dataset.txt";
};

inline int cmd_gendata(const GendataOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (o.d1 < 2) throw ConfigError("d1: need at least 2 locations to form pairs");
    if (o.m < 2) throw ConfigError("M: need at least 2 replicates");
    if (!(o.phi1 > 0.0) || !std::isfinite(o.phi1)) throw ConfigError("phi1: must be > 0");
    if (!(o.phi2 > 0.0) || !std::isfinite(o.phi2)) throw ConfigError("phi2: must be > 0");
    if (o.axes.size() != 3) throw ConfigError("axes: expected three semi-axes a,b,c");
    for (const double a : o.axes)
      if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("axes: semi-axes must be > 0");
    if (!o.seed) throw ConfigError("seed: required");
    const auto ds = make_dataset(o.d1, o.m, o.phi1, o.phi2, EllipsoidAxes{o.axes[0], o.axes[1], o.axes[2]}, *o.seed);
    save_dataset(o.out_path, ds);
    out << "wrote " << o.out_path << " (d1=" << o.d1 << ", M=" << o.m << ")\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// dispersion

struct DispersionOptions {
  unsigned s = 2;
  std::uint64_t n = 256;
  std::uint64_t first = 0;
  std::size_t grid = 129;
  std::string generator = "sobol";
  unsigned b = 2;
};

inline int cmd_dispersion(const DispersionOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (o.n < 1) throw ConfigError("n: must be >= 1");
    if (o.n > (std::uint64_t{1} << 24)) throw ConfigError("n: must be <= 2^24");
    if (o.s < 1 || o.s > 6) throw ConfigError("s: must be in [1, 6]");
    if (o.grid < 2) throw ConfigError("grid: must be >= 2");
    double cells = 1.0;
    for (unsigned j = 0; j < o.s; ++j) cells *= static_cast<double>(o.grid);
    if (cells > 1e8) throw ConfigError("grid: grid^s must be <= 1e8");
    DigitalSequenceConfig seq;
    seq.base = o.b;
    seq.dimension = o.s;
    if (o.generator == "sobol") seq.kind = GeneratorKind::Sobol;
    else if (o.generator == "vdc") seq.kind = GeneratorKind::VanDerCorput;
    else throw ConfigError("generator: expected sobol or vdc");
    seq.validate();
    const PointSet pts = generate_points(seq, o.first, o.n);
    out << "dispersion=" << detail::format_double(dispersion_estimate(pts, o.grid)) << " n=" << o.n << " s=" << o.s
        << " grid=" << o.grid << '\n';
    return kExitOk;
  });
}

}  // namespace qmcsa::cli
