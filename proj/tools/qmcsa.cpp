// qmcsa command-line tool: run, bench, netcheck, gendata, dispersion.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qmcsa/cli.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> split_sets(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected section.key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace c = qmcsa::cli;
  CLI::App app{"Quasi-Monte Carlo simulated annealing toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // run
  auto* run = app.add_subcommand("run", "Run one optimization from a config file and write its trace CSV");
  std::string run_config;
  c::RunOverrides ov;
  std::string engine;
  std::uint64_t seed = 0, iterations = 0;
  std::string trace;
  std::vector<std::string> run_sets;
  run->add_option("config", run_config, "Run config file")->required()->check(CLI::ExistingFile);
  auto* o_engine = run->add_option("--engine", engine, "Override engine.engine (qmc-sa, ta, mc-sa)");
  auto* o_seed = run->add_option("--seed", seed, "Override engine.seed");
  auto* o_iter = run->add_option("--iterations", iterations, "Override engine.iterations");
  auto* o_trace = run->add_option("--trace", trace, "Override output.trace");
  run->add_option("--set", run_sets, "Override any key: section.key=value (repeatable)");
  for (auto* o : {o_engine, o_seed, o_iter, o_trace}) o->default_str("from config");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a many-start benchmark and write rows and aggregates CSV");
  std::string bench_config;
  std::vector<std::string> bench_sets;
  bench->add_option("config", bench_config, "Benchmark config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--set", bench_sets, "Override any key: section.key=value (repeatable)");

  // netcheck
  auto* net = app.add_subcommand("netcheck", "Check that a block of b^m sequence points forms a (t,m,s)-net");
  c::NetcheckOptions no;
  std::uint64_t corrupt = 0;
  net->add_option("--b", no.b, "Base");
  net->add_option("--t", no.t, "Quality parameter t");
  net->add_option("--m", no.m, "log_b of the block size (<= 12)");
  net->add_option("--s", no.s, "Dimension (<= 4)");
  net->add_option("--generator", no.generator, "sobol or vdc");
  net->add_option("--block", no.block, "Block index a: checks points a*b^m .. (a+1)*b^m - 1");
  auto* o_corrupt = net->add_option("--corrupt", corrupt, "Displace the point with this index within the block");
  o_corrupt->default_str("none");

  // gendata
  auto* gen = app.add_subcommand("gendata", "Simulate a spatial dataset and save it");
  c::GendataOptions go;
  std::uint64_t gen_seed = 0;
  gen->add_option("--d1", go.d1, "Number of locations (>= 2)");
  gen->add_option("--M", go.m, "Number of replicates");
  gen->add_option("--phi1", go.phi1, "Covariance sill");
  gen->add_option("--phi2", go.phi2, "Covariance range");
  gen->add_option("--axes", go.axes, "Half-ellipsoid semi-axes a b c")->expected(3);
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--out", go.out_path, "Output dataset path");

  // dispersion
  auto* disp = app.add_subcommand("dispersion", "Estimate the dispersion of sequence points on a grid");
  c::DispersionOptions dopt;
  disp->add_option("--s", dopt.s, "Dimension");
  disp->add_option("--n", dopt.n, "Number of points");
  disp->add_option("--first", dopt.first, "Index of the first point");
  disp->add_option("--grid", dopt.grid, "Grid points per axis");
  disp->add_option("--generator", dopt.generator, "sobol or vdc");
  disp->add_option("--b", dopt.b, "Base (vdc only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : c::kExitUsage;
  }

  if (*run) {
    if (*o_engine) ov.engine = engine;
    if (*o_seed) ov.seed = seed;
    if (*o_iter) ov.iterations = iterations;
    if (*o_trace) ov.trace = trace;
    try {
      ov.set = split_sets(run_sets);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : c::kExitUsage;
    }
    return c::cmd_run(run_config, ov, std::cout, std::cerr);
  }
  if (*bench) {
    std::vector<std::pair<std::string, std::string>> sets;
    try {
      sets = split_sets(bench_sets);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : c::kExitUsage;
    }
    return c::cmd_bench(bench_config, sets, std::cout, std::cerr);
  }
  if (*net) {
    if (*o_corrupt) no.corrupt = corrupt;
    return c::cmd_netcheck(no, std::cout, std::cerr);
  }
  if (*gen) {
    go.seed = gen_seed;
    return c::cmd_gendata(go, std::cout, std::cerr);
  }
  return c::cmd_dispersion(dopt, std::cout, std::cerr);
}
