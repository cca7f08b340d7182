// Minimize a user-supplied function on a box with QMC-SA and MC-SA.

#include <cmath>
#include <iostream>
#include <numbers>
#include <vector>

#include "qmcsa/anneal.hpp"
#include "qmcsa/objectives.hpp"

int main() {
  using namespace qmcsa;

  // 3-d Rastrigin on [-5.12, 5.12]^3; global minimum 0 at the origin.
  const std::size_t d = 3;
  Objective rastrigin(
      "rastrigin", std::vector<double>(d, -5.12), std::vector<double>(d, 5.12),
      [](std::span<const double> x) {
        double s = 10.0 * static_cast<double>(x.size());
        for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
        return s;
      },
      Sense::Minimize);

  const auto kernel = ProductKernel::uniform(d, KernelFamily::Cauchy, 1.0, Support{-5.12, 5.12});
  const std::vector<double> x0{4.0, -3.5, 2.2};

  for (const auto kind : {EngineKind::QmcSa, EngineKind::McSa}) {
    EngineConfig cfg;
    cfg.engine = kind;
    cfg.iterations = 1u << 15;
    cfg.record_states = false;
    cfg.rng_seed = 11;
    const auto tr = run_engine(rastrigin, kernel, Schedule::t1(10.0), x0, cfg);
    std::cout << (kind == EngineKind::QmcSa ? "qmc-sa" : "mc-sa ") << "  best " << rastrigin.reported(tr.best_value)
              << " at iteration " << tr.best_index << "  x* = (";
    for (std::size_t i = 0; i < d; ++i) std::cout << (i ? ", " : "") << tr.best_state[i];
    std::cout << ")\n";
  }
}
