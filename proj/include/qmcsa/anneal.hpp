#pragma once

// Annealing engines: QMC simulated annealing driven by a (t,d)_R-sequence
// and a van der Corput acceptance sequence, the generalized variant with a
// deterministic threshold sequence (threshold accepting), and plain Monte
// Carlo simulated annealing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "qmcsa/detail/format.hpp"
#include "qmcsa/errors.hpp"
#include "qmcsa/kernels.hpp"
#include "qmcsa/lds.hpp"
#include "qmcsa/rng.hpp"

namespace qmcsa {

// ---------------------------------------------------------------------------
// Cooling schedules

enum class ScheduleFamily { T1, T2, T3, T4, Custom };

/// Positive nonincreasing temperature sequence T_n, n >= 1.
///
///   T1: T0 / ((n+1)^(1+eps) log(n+1))
///   T2: T0 / n
///   T3: T0 / log(n+1)
///   T4: T0 / log(n + C)
///   Custom: table[n-1], holding the last entry past the end.
///
/// T1 and T3 are evaluated at n + 1 since log 1 = 0.
struct Schedule {
  ScheduleFamily family = ScheduleFamily::T1;
  double t0 = 1.0;
  double epsilon = 0.001;
  double c = 100.0;
  std::vector<double> table;

  static Schedule t1(double t0, double epsilon = 0.001) { return {ScheduleFamily::T1, t0, epsilon, 100.0, {}}; }
  static Schedule t2(double t0) { return {ScheduleFamily::T2, t0, 0.001, 100.0, {}}; }
  static Schedule t3(double t0) { return {ScheduleFamily::T3, t0, 0.001, 100.0, {}}; }
  static Schedule t4(double t0, double c) { return {ScheduleFamily::T4, t0, 0.001, c, {}}; }
  static Schedule custom(std::vector<double> table) {
    return {ScheduleFamily::Custom, 1.0, 0.001, 100.0, std::move(table)};
  }

  void validate() const {
    if (family == ScheduleFamily::Custom) {
      if (table.empty()) throw ConfigError("schedule.table: custom schedule needs at least one temperature");
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(table[i] > 0.0) || !std::isfinite(table[i]))
          throw ConfigError("schedule.table: temperatures must be positive and finite");
        if (i > 0 && table[i] > table[i - 1]) throw ConfigError("schedule.table: temperatures must be nonincreasing");
      }
      return;
    }
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("schedule.T0: must be > 0");
    if (family == ScheduleFamily::T1 && !(epsilon > 0.0)) throw ConfigError("schedule.epsilon: must be > 0");
    if (family == ScheduleFamily::T4 && !(c > 0.0)) throw ConfigError("schedule.C: must be > 0");
  }

  std::string label() const {
    switch (family) {
      case ScheduleFamily::T1: return "T1(T0=" + detail::format_double(t0) + ",eps=" + detail::format_double(epsilon) + ")";
      case ScheduleFamily::T2: return "T2(T0=" + detail::format_double(t0) + ")";
      case ScheduleFamily::T3: return "T3(T0=" + detail::format_double(t0) + ")";
      case ScheduleFamily::T4: return "T4(T0=" + detail::format_double(t0) + ",C=" + detail::format_double(c) + ")";
      case ScheduleFamily::Custom: return "custom";
    }
    return "?";
  }
};

inline double temperature(const Schedule& s, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("temperature: n must be >= 1");
  const double x = static_cast<double>(n);
  switch (s.family) {
    case ScheduleFamily::T1: return s.t0 / (std::pow(x + 1.0, 1.0 + s.epsilon) * std::log(x + 1.0));
    case ScheduleFamily::T2: return s.t0 / x;
    case ScheduleFamily::T3: return s.t0 / std::log(x + 1.0);
    case ScheduleFamily::T4: return s.t0 / std::log(x + s.c);
    case ScheduleFamily::Custom: return s.table[std::min<std::uint64_t>(n, s.table.size()) - 1];
  }
  return 0.0;
}

/// Nondecreasing sequence l_n; moves dropping by more than 1/l_n are
/// rejected. Quadratic: l_n = l0 n^2 (so sum 1/l_n converges).
struct ThresholdSchedule {
  enum class Growth { Quadratic, Custom };
  Growth growth = Growth::Quadratic;
  double l0 = 1.0;
  std::vector<double> table;

  static ThresholdSchedule quadratic(double l0) { return {Growth::Quadratic, l0, {}}; }
  static ThresholdSchedule custom(std::vector<double> table) { return {Growth::Custom, 1.0, std::move(table)}; }

  void validate() const {
    if (growth == Growth::Custom) {
      if (table.empty()) throw ConfigError("threshold.table: custom thresholds need at least one level");
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(table[i] > 0.0) || !std::isfinite(table[i]))
          throw ConfigError("threshold.table: levels must be positive and finite");
        if (i > 0 && table[i] < table[i - 1]) throw ConfigError("threshold.table: levels must be nondecreasing");
      }
      return;
    }
    if (!(l0 > 0.0) || !std::isfinite(l0)) throw ConfigError("threshold.l0: must be > 0");
  }

  std::string label() const {
    return growth == Growth::Quadratic ? "TA(l0=" + detail::format_double(l0) + ",n^2)" : "TA(custom)";
  }
};

/// l_n for n >= 1.
inline double threshold_level(const ThresholdSchedule& s, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("threshold_level: n must be >= 1");
  if (s.growth == ThresholdSchedule::Growth::Custom) return s.table[std::min<std::uint64_t>(n, s.table.size()) - 1];
  const double x = static_cast<double>(n);
  return s.l0 * x * x;
}

using Cooling = std::variant<Schedule, ThresholdSchedule>;

inline std::string cooling_label(const Cooling& c) {
  return std::visit([](const auto& s) { return s.label(); }, c);
}

// ---------------------------------------------------------------------------
// Acceptance rules

/// Metropolis step: accept iff v <= exp((phi_y - phi_x) / T).
inline bool accept_metropolis(double phi_y, double phi_x, double temp, double v) {
  if (phi_y >= phi_x) return true;
  return v <= std::exp((phi_y - phi_x) / temp);
}

enum class GrayZoneRule { AlwaysAccept, AlwaysReject };

/// Threshold rule: accept upward moves, reject drops larger than
/// `threshold`, resolve drops in (0, threshold] by `rule`.
inline bool accept_threshold(double phi_y, double phi_x, double threshold, GrayZoneRule rule) {
  if (phi_y >= phi_x) return true;
  if (phi_y < phi_x - threshold) return false;
  return rule == GrayZoneRule::AlwaysAccept;
}

// ---------------------------------------------------------------------------
// Engine configuration and trace

enum class EngineKind { QmcSa, ThresholdAccepting, McSa };
enum class AcceptanceSequence { VanDerCorput, IidUniform };

inline std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::QmcSa: return "qmc-sa";
    case EngineKind::ThresholdAccepting: return "ta";
    case EngineKind::McSa: return "mc-sa";
  }
  return "?";
}

struct EngineConfig {
  EngineKind engine = EngineKind::QmcSa;
  std::uint64_t iterations = 1024;
  RandomizationSpec randomization;
  AcceptanceSequence acceptance = AcceptanceSequence::VanDerCorput;
  unsigned acceptance_base = 2;
  std::uint64_t rng_seed = 0;
  GrayZoneRule gray_zone = GrayZoneRule::AlwaysAccept;
  bool record_states = true;

  void validate() const {
    if (iterations < 1) throw ConfigError("engine.iterations: must be >= 1");
    if (iterations >= (std::uint64_t{1} << 40)) throw ConfigError("engine.iterations: too large");
    if (acceptance_base < 2) throw ConfigError("engine.acceptance_base: must be >= 2");
  }

  /// True when the run consumes pseudo-random numbers.
  bool stochastic() const noexcept {
    if (engine == EngineKind::McSa) return true;
    if (!randomization.r_digits.is_infinite()) return true;
    return engine == EngineKind::QmcSa && acceptance == AcceptanceSequence::IidUniform;
  }
};

/// Record of one run, indices 0..N. Entry 0 describes the start point.
struct Trace {
  std::size_t dimension = 0;
  std::vector<double> states;            // (N+1) x dimension, row-major; empty if not recorded
  std::vector<double> objective_values;  // phi(x^n), maximize sense
  std::vector<double> proposal_values;   // phi(y^n); entry 0 holds phi(x^0)
  std::vector<std::uint8_t> accepted;    // entry 0 is 1
  std::vector<double> temperatures;      // T_n, or the threshold 1/l_n for TA; entry 0 is 0
  std::uint64_t proposal_count = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  std::uint64_t best_index = 0;
  std::vector<double> best_state;

  std::uint64_t iterations() const noexcept { return objective_values.empty() ? 0 : objective_values.size() - 1; }
  bool has_states() const noexcept { return !states.empty(); }
  std::span<const double> state(std::size_t n) const {
    if (!has_states()) throw std::logic_error("trace: states were not recorded");
    return {states.data() + n * dimension, dimension};
  }
};

namespace detail {

inline std::string describe_state(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += format_double(x[i]);
  }
  return s + ")";
}

template <class Phi>
double evaluate_checked(Phi& phi, std::span<const double> x, std::uint64_t n) {
  const double v = static_cast<double>(phi(x));
  if (!std::isfinite(v))
    throw RunAborted("objective returned non-finite value " + format_double(v) + " at iteration " + std::to_string(n) +
                     ", state " + describe_state(x));
  return v;
}

/// Shared loop. `propose(n, u)` fills the uniforms for step n; `decide(n,
/// phi_y, phi_x)` returns {accepted, level} where level is logged.
template <class Phi, class Propose, class Decide>
Trace run_loop(Phi& phi, const ProductKernel& kernel, std::span<const double> x0, const EngineConfig& config,
               Propose&& propose, Decide&& decide) {
  config.validate();
  const std::size_t d = kernel.dimension();
  if (x0.size() != d) throw std::invalid_argument("engine: start point dimension differs from kernel dimension");
  if (!kernel.contains(x0))
    throw std::invalid_argument("engine: start point " + describe_state(x0) + " is outside the kernel support");

  const std::uint64_t n_iter = config.iterations;
  Trace tr;
  tr.dimension = d;
  tr.objective_values.reserve(n_iter + 1);
  tr.proposal_values.reserve(n_iter + 1);
  tr.accepted.reserve(n_iter + 1);
  tr.temperatures.reserve(n_iter + 1);
  if (config.record_states) tr.states.reserve((n_iter + 1) * d);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> y(d), u(d);
  double phi_x = evaluate_checked(phi, x, 0);

  tr.objective_values.push_back(phi_x);
  tr.proposal_values.push_back(phi_x);
  tr.accepted.push_back(1);
  tr.temperatures.push_back(0.0);
  if (config.record_states) tr.states.insert(tr.states.end(), x.begin(), x.end());
  tr.best_value = phi_x;
  tr.best_state = x;

  for (std::uint64_t n = 1; n <= n_iter; ++n) {
    propose(n, std::span<double>(u));
    sample_kernel(kernel, x, u, y);
    const double phi_y = evaluate_checked(phi, y, n);
    ++tr.proposal_count;
    const auto [ok, level] = decide(n, phi_y, phi_x);
    if (ok) {
      x.swap(y);
      phi_x = phi_y;
    }
    tr.objective_values.push_back(phi_x);
    tr.proposal_values.push_back(phi_y);
    tr.accepted.push_back(ok ? 1 : 0);
    tr.temperatures.push_back(level);
    if (config.record_states) tr.states.insert(tr.states.end(), x.begin(), x.end());
    if (phi_x > tr.best_value) {
      tr.best_value = phi_x;
      tr.best_index = n;
      tr.best_state = x;
    }
  }
  return tr;
}

struct Decision {
  bool accepted;
  double level;
};

}  // namespace detail

/// QMC simulated annealing. Proposals use u_R^n from the (t,d)_R Sobol'
/// sequence (n = 1..N); acceptance uses v^n = radical_inverse(n, b), or IID
/// uniforms when configured.
template <class Phi>
Trace qmc_sa_run(Phi&& phi, const ProductKernel& kernel, const Schedule& schedule, std::span<const double> x0,
                 const EngineConfig& config) {
  schedule.validate();
  RandomizedSobolStream stream(SobolGenerator(kernel.dimension()), config.randomization, 1);
  Rng rng(config.rng_seed);
  const bool vdc = config.acceptance == AcceptanceSequence::VanDerCorput;
  return detail::run_loop(
      phi, kernel, x0, config, [&](std::uint64_t, std::span<double> u) { stream.next(u); },
      [&](std::uint64_t n, double phi_y, double phi_x) {
        const double t = temperature(schedule, n);
        const double v = vdc ? radical_inverse(n, config.acceptance_base) : rng.uniform();
        return detail::Decision{accept_metropolis(phi_y, phi_x, t, v), t};
      });
}

/// Generalized QMC-SA with a deterministic threshold sequence; with the
/// default AlwaysAccept gray-zone rule this is threshold accepting.
template <class Phi>
Trace ta_run(Phi&& phi, const ProductKernel& kernel, const ThresholdSchedule& thresholds, std::span<const double> x0,
             const EngineConfig& config) {
  thresholds.validate();
  RandomizedSobolStream stream(SobolGenerator(kernel.dimension()), config.randomization, 1);
  return detail::run_loop(
      phi, kernel, x0, config, [&](std::uint64_t, std::span<double> u) { stream.next(u); },
      [&](std::uint64_t n, double phi_y, double phi_x) {
        const double thr = 1.0 / threshold_level(thresholds, n);
        return detail::Decision{accept_threshold(phi_y, phi_x, thr, config.gray_zone), thr};
      });
}

/// Monte Carlo simulated annealing: IID uniforms drive both the proposal
/// (d draws, through the same inverse Rosenblatt map) and acceptance (one
/// draw), in that order at every step.
template <class Phi>
Trace mc_sa_run(Phi&& phi, const ProductKernel& kernel, const Schedule& schedule, std::span<const double> x0,
                const EngineConfig& config) {
  schedule.validate();
  Rng rng(config.rng_seed);
  return detail::run_loop(
      phi, kernel, x0, config,
      [&](std::uint64_t, std::span<double> u) {
        for (double& ui : u) ui = rng.uniform();
      },
      [&](std::uint64_t n, double phi_y, double phi_x) {
        const double t = temperature(schedule, n);
        const double v = rng.uniform();
        return detail::Decision{accept_metropolis(phi_y, phi_x, t, v), t};
      });
}

/// Dispatch on config.engine. TA takes a ThresholdSchedule, the others a Schedule.
template <class Phi>
Trace run_engine(Phi&& phi, const ProductKernel& kernel, const Cooling& cooling, std::span<const double> x0,
                 const EngineConfig& config) {
  if (config.engine == EngineKind::ThresholdAccepting) {
    const auto* ts = std::get_if<ThresholdSchedule>(&cooling);
    if (!ts) throw ConfigError("engine 'ta' needs a threshold schedule");
    return ta_run(phi, kernel, *ts, x0, config);
  }
  const auto* s = std::get_if<Schedule>(&cooling);
  if (!s) throw ConfigError("engine '" + to_string(config.engine) + "' needs a temperature schedule");
  return config.engine == EngineKind::QmcSa ? qmc_sa_run(phi, kernel, *s, x0, config)
                                            : mc_sa_run(phi, kernel, *s, x0, config);
}

// ---------------------------------------------------------------------------
// Trace audits and export

/// Indices n where y^n was accepted although
/// phi(y^n) < phi(x^{n-1}) - T_n k_n log b. With the van der Corput
/// acceptance sequence (v^0 = 0) such moves are always rejected, so a
/// correct QMC-SA trace yields an empty list.
inline std::vector<std::uint64_t> rejection_guard(const Trace& trace, unsigned b) {
  std::vector<std::uint64_t> bad;
  const double log_b = std::log(static_cast<double>(b));
  for (std::uint64_t n = 1; n <= trace.iterations(); ++n) {
    if (!trace.accepted[n]) continue;
    const double bound = trace.objective_values[n - 1] - trace.temperatures[n] * kn(n, b) * log_b;
    if (trace.proposal_values[n] < bound) bad.push_back(n);
  }
  return bad;
}

/// CSV with header `n,accepted,phi,T_n` and, optionally, `x1..xd`.
/// Row 0 is the start point (accepted = 1, T_n = 0).
inline void write_trace_csv(std::ostream& out, const Trace& trace, bool include_states) {
  const bool states = include_states && trace.has_states();
  out << "n,accepted,phi,T_n";
  if (states)
    for (std::size_t j = 0; j < trace.dimension; ++j) out << ",x" << (j + 1);
  out << '\n';
  for (std::uint64_t n = 0; n <= trace.iterations(); ++n) {
    out << n << ',' << int{trace.accepted[n]} << ',' << detail::format_double(trace.objective_values[n]) << ','
        << detail::format_double(trace.temperatures[n]);
    if (states)
      for (const double xj : trace.state(n)) out << ',' << detail::format_double(xj);
    out << '\n';
  }
}

}  // namespace qmcsa
