#pragma once

// Synthetic data for variogram fitting: locations on a half-ellipsoid and
// stationary Gaussian-process replicates, plus a plain-text dataset format.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qmcsa/detail/format.hpp"
#include "qmcsa/errors.hpp"
#include "qmcsa/lds.hpp"
#include "qmcsa/rng.hpp"

namespace qmcsa {

/// Semi-axes of the ellipsoid (x/a)^2 + (y/b)^2 + (z/c)^2 = 1.
struct EllipsoidAxes {
  double a = 1.0;
  double b = 1.0;
  double c = 0.5;
};

struct Locations {
  std::vector<std::array<double, 2>> planar;  // footprint (x, y)
  std::vector<std::array<double, 3>> lifted;  // (x, y, z) on the upper half-ellipsoid
};

inline std::array<double, 3> lift_to_ellipsoid(double x, double y, const EllipsoidAxes& axes) {
  const double rx = x / axes.a;
  const double ry = y / axes.b;
  return {x, y, axes.c * std::sqrt(std::max(0.0, 1.0 - rx * rx - ry * ry))};
}

/// d1 footprint points spread quasi-uniformly over the ellipse (x/a)^2 +
/// (y/b)^2 <= 1 by mapping a digitally shifted 2-d Sobol' net through the
/// area-preserving polar map, then lifted to the upper half-ellipsoid.
/// The digital shift is derived from `seed`.
inline Locations gen_locations(std::size_t d1, const EllipsoidAxes& axes, std::uint64_t seed) {
  if (d1 < 2) throw std::invalid_argument("gen_locations: need at least two locations");
  if (!(axes.a > 0 && axes.b > 0 && axes.c > 0)) throw std::invalid_argument("gen_locations: semi-axes must be > 0");
  const SobolGenerator gen(2);
  const std::array<std::uint64_t, 2> shift{derive_seed(seed, 0) >> 1, derive_seed(seed, 1) >> 1};
  std::array<std::uint64_t, 2> raw{};
  Locations out;
  for (std::size_t n = 0; n < d1; ++n) {
    gen.integer_point(n, raw);
    const double u1 = SobolGenerator::to_unit(raw[0] ^ shift[0]);
    const double u2 = SobolGenerator::to_unit(raw[1] ^ shift[1]);
    const double r = std::sqrt(u1);
    const double theta = 2.0 * std::numbers::pi * u2;
    const double x = axes.a * r * std::cos(theta);
    const double y = axes.b * r * std::sin(theta);
    out.planar.push_back({x, y});
    out.lifted.push_back(lift_to_ellipsoid(x, y, axes));
  }
  return out;
}

/// Exponential covariance phi1 exp(-||p - q|| / phi2).
inline double exponential_covariance(double phi1, double phi2, const std::array<double, 3>& p,
                                     const std::array<double, 3>& q) {
  const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
  return phi1 * std::exp(-std::sqrt(dx * dx + dy * dy + dz * dz) / phi2);
}

/// M independent zero-mean GP draws (rows) at the given locations (columns).
/// Cholesky with a deterministic jitter ladder 1e-12 phi1, doubling, up to
/// 1e-6 phi1.
inline Eigen::MatrixXd simulate_gp(const std::vector<std::array<double, 3>>& locations, double phi1, double phi2,
                                   std::size_t m, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("simulate_gp: need M >= 2 replicates");
  if (!(phi1 > 0.0 && phi2 > 0.0)) throw std::invalid_argument("simulate_gp: phi1 and phi2 must be > 0");
  const auto d1 = static_cast<Eigen::Index>(locations.size());
  if (d1 == 0) throw std::invalid_argument("simulate_gp: no locations");

  Eigen::MatrixXd cov(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i)
    for (Eigen::Index j = 0; j < d1; ++j)
      cov(i, j) = exponential_covariance(phi1, phi2, locations[static_cast<std::size_t>(i)],
                                         locations[static_cast<std::size_t>(j)]);

  Eigen::MatrixXd lower;
  bool ok = false;
  for (double jitter = 1e-12 * phi1; jitter <= 1e-6 * phi1 * (1 + 1e-9); jitter *= 2.0) {
    Eigen::MatrixXd a = cov;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      ok = true;
      break;
    }
  }
  if (!ok) throw GenerationError("simulate_gp: covariance not positive definite even with jitter 1e-6 * phi1");

  Rng rng(seed);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(m), d1);
  Eigen::VectorXd xi(d1);
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    for (Eigen::Index i = 0; i < d1; ++i) xi(i) = rng.normal();
    y.row(r) = (lower * xi).transpose();
  }
  return y;
}

// ---------------------------------------------------------------------------
// Dataset

struct SpatialDataset {
  std::vector<std::array<double, 2>> locations2d;
  std::vector<std::array<double, 3>> locations3d;  // generating truth, diagnostics only
  Eigen::MatrixXd observations;                    // M x d1
  double phi1 = 1.0;
  double phi2 = 1.0;
  EllipsoidAxes axes;
  std::uint64_t seed = 0;

  std::size_t d1() const noexcept { return locations2d.size(); }
  std::size_t replicates() const noexcept { return static_cast<std::size_t>(observations.rows()); }

  /// Per-location sample standard deviation (population normalization).
  std::vector<double> location_sd() const {
    std::vector<double> sd(d1());
    for (Eigen::Index i = 0; i < observations.cols(); ++i) {
      const double mu = observations.col(i).mean();
      sd[static_cast<std::size_t>(i)] = std::sqrt((observations.col(i).array() - mu).square().mean());
    }
    return sd;
  }

  friend bool operator==(const SpatialDataset& a, const SpatialDataset& b) {
    return a.locations2d == b.locations2d && a.locations3d == b.locations3d &&
           a.observations.rows() == b.observations.rows() && a.observations.cols() == b.observations.cols() &&
           a.observations == b.observations && a.phi1 == b.phi1 && a.phi2 == b.phi2 && a.axes.a == b.axes.a &&
           a.axes.b == b.axes.b && a.axes.c == b.axes.c && a.seed == b.seed;
  }
};

inline SpatialDataset make_dataset(std::size_t d1, std::size_t m, double phi1, double phi2, const EllipsoidAxes& axes,
                                   std::uint64_t seed) {
  auto locs = gen_locations(d1, axes, derive_seed(seed, 0));
  SpatialDataset ds;
  ds.observations = simulate_gp(locs.lifted, phi1, phi2, m, derive_seed(seed, 1));
  ds.locations2d = std::move(locs.planar);
  ds.locations3d = std::move(locs.lifted);
  ds.phi1 = phi1;
  ds.phi2 = phi2;
  ds.axes = axes;
  ds.seed = seed;
  return ds;
}

inline constexpr int kDatasetVersion = 1;

/// Dataset file, version 1:
///
///     qmcsa-spatial-dataset version=1 d1=<int> M=<int> phi1=<x> phi2=<x> a=<x> b=<x> c=<x> seed=<int>
///     locations x y X Y Z
///     <d1 lines: footprint x y, then ellipsoid point X Y Z>
///     observations
///     <M lines of d1 values; column i is location i>
///     end
///
/// Numbers are written as shortest round-trip decimals, so save/load is
/// lossless.
inline void save_dataset(std::ostream& out, const SpatialDataset& ds) {
  using detail::format_double;
  out << "qmcsa-spatial-dataset version=" << kDatasetVersion << " d1=" << ds.d1() << " M=" << ds.replicates()
      << " phi1=" << format_double(ds.phi1) << " phi2=" << format_double(ds.phi2) << " a=" << format_double(ds.axes.a)
      << " b=" << format_double(ds.axes.b) << " c=" << format_double(ds.axes.c) << " seed=" << ds.seed << '\n';
  out << "locations x y X Y Z\n";
  for (std::size_t i = 0; i < ds.d1(); ++i) {
    out << format_double(ds.locations2d[i][0]) << ' ' << format_double(ds.locations2d[i][1]);
    for (const double v : ds.locations3d[i]) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "observations\n";
  for (Eigen::Index r = 0; r < ds.observations.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.observations.cols(); ++c) out << (c ? " " : "") << format_double(ds.observations(r, c));
    out << '\n';
  }
  out << "end\n";
}

inline void save_dataset(const std::string& path, const SpatialDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_dataset(out, ds);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline SpatialDataset load_dataset(std::istream& in, const std::string& source = "<stream>") {
  std::size_t lineno = 0;
  std::string line;
  auto fail = [&](const std::string& what) { return ParseError(source + ":" + std::to_string(lineno) + ": " + what); };
  auto next_line = [&](const char* expecting) {
    if (!std::getline(in, line)) {
      ++lineno;
      throw fail(std::string("unexpected end of file, expected ") + expecting);
    }
    ++lineno;
    return std::string(detail::trim(line));
  };
  auto numbers = [&](const std::string& text, std::size_t count, const char* what) {
    std::vector<double> v;
    std::istringstream fields(text);
    std::string tok;
    while (fields >> tok) {
      double x;
      if (!detail::parse_double(tok, x) || !std::isfinite(x))
        throw fail(std::string(what) + " field " + std::to_string(v.size() + 1) + ": invalid number '" + tok + "'");
      v.push_back(x);
    }
    if (v.size() != count)
      throw fail(std::string(what) + ": expected " + std::to_string(count) + " values, found " + std::to_string(v.size()));
    return v;
  };

  const std::string header = next_line("dataset header");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "qmcsa-spatial-dataset") throw fail("not a qmcsa spatial dataset (missing magic word)");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw fail("header field '" + tok + "' is not key=value");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw fail("header is missing field '" + key + "'");
    return it->second;
  };
  auto get_real = [&](const std::string& key) {
    double x;
    if (!detail::parse_double(get(key), x) || !std::isfinite(x)) throw fail("header field '" + key + "' is not a number");
    return x;
  };
  auto get_int = [&](const std::string& key) {
    std::uint64_t x;
    if (!detail::parse_integer(get(key), x)) throw fail("header field '" + key + "' is not a nonnegative integer");
    return x;
  };

  const auto version = get_int("version");
  if (version != kDatasetVersion)
    throw ParseError(source + ": unsupported dataset version " + std::to_string(version) + " (this build reads version " +
                     std::to_string(kDatasetVersion) + ")");
  SpatialDataset ds;
  const auto d1 = get_int("d1");
  const auto m = get_int("M");
  if (d1 < 1 || m < 1) throw fail("header: d1 and M must be >= 1");
  ds.phi1 = get_real("phi1");
  ds.phi2 = get_real("phi2");
  ds.axes = {get_real("a"), get_real("b"), get_real("c")};
  ds.seed = get_int("seed");

  if (next_line("'locations' section").rfind("locations", 0) != 0) throw fail("expected 'locations' section");
  for (std::uint64_t i = 0; i < d1; ++i) {
    const auto v = numbers(next_line("location row"), 5, "location row");
    ds.locations2d.push_back({v[0], v[1]});
    ds.locations3d.push_back({v[2], v[3], v[4]});
  }
  if (next_line("'observations' section") != "observations") throw fail("expected 'observations' section");
  ds.observations.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d1));
  for (std::uint64_t r = 0; r < m; ++r) {
    const auto v = numbers(next_line("observation row"), d1, "observation row");
    for (std::uint64_t c = 0; c < d1; ++c)
      ds.observations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
  }
  if (next_line("'end' marker") != "end") throw fail("expected 'end' marker");
  return ds;
}

inline SpatialDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset '" + path + "'");
  return load_dataset(in, path);
}

}  // namespace qmcsa
