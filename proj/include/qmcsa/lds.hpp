#pragma once

// Low-discrepancy sequences: van der Corput / Sobol' digital sequences, their
// R-digit randomizations, and equidistribution diagnostics (net check,
// dispersion, star discrepancy).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmcsa/detail/format.hpp"
#include "qmcsa/detail/joe_kuo_table.hpp"
#include "qmcsa/errors.hpp"
#include "qmcsa/rng.hpp"

namespace qmcsa {

/// Number of bits carried by the integer Sobol' state; points are
/// numerators over 2^63.
inline constexpr unsigned kSobolBits = 63;

/// Largest double strictly below one.
inline constexpr double kBelowOne = 1.0 - 0x1.0p-53;

// ---------------------------------------------------------------------------
// Point sets

/// Row-major set of points in [0,1)^s.
class PointSet {
 public:
  explicit PointSet(std::size_t dimension) : dim_(dimension) {
    if (dimension == 0) throw std::invalid_argument("PointSet: dimension must be >= 1");
  }
  PointSet(std::size_t dimension, std::vector<double> coords) : PointSet(dimension) {
    if (coords.size() % dimension != 0)
      throw std::invalid_argument("PointSet: coordinate count not a multiple of dimension");
    coords_ = std::move(coords);
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> p) {
    if (p.size() != dim_) throw std::invalid_argument("PointSet: point has wrong dimension");
    coords_.insert(coords_.end(), p.begin(), p.end());
  }

  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

// ---------------------------------------------------------------------------
// Scalar helpers

/// Radical inverse of n in base b: the n-th point of the van der Corput
/// (0,1)-sequence. radical_inverse(0, b) == 0.
inline double radical_inverse(std::uint64_t n, unsigned b) {
  if (b < 2) throw std::invalid_argument("radical_inverse: base must be >= 2");
  if (b == 2) {
    // Bit reversal is exact in 64-bit arithmetic; keep the top 53 bits.
    std::uint64_t rev = 0;
    for (std::uint64_t m = n; m != 0; m >>= 1) rev = (rev << 1) | (m & 1U);
    const int width = 64 - std::countl_zero(n);
    // rev has `width` significant bits: value = rev / 2^width.
    if (width <= 53) return std::ldexp(static_cast<double>(rev), -width);
    return std::ldexp(static_cast<double>(rev >> (width - 53)), -53);
  }
  // Accumulate reversed digits as an integer while b^k fits, then divide once.
  std::uint64_t numer = 0;
  std::uint64_t denom = 1;
  double tail_scale = 0.0;
  double value = 0.0;
  for (std::uint64_t m = n; m != 0; m /= b) {
    const std::uint64_t digit = m % b;
    if (tail_scale == 0.0 && denom <= std::numeric_limits<std::uint64_t>::max() / b / b) {
      numer = numer * b + digit;
      denom *= b;
    } else {
      if (tail_scale == 0.0) {
        value = static_cast<double>(numer) / static_cast<double>(denom);
        tail_scale = 1.0 / static_cast<double>(denom);
      }
      tail_scale /= b;
      value += static_cast<double>(digit) * tail_scale;
    }
  }
  if (tail_scale == 0.0) value = static_cast<double>(numer) / static_cast<double>(denom);
  return std::min(value, kBelowOne);
}

/// Smallest k with n < b^k (n >= 1).
inline unsigned kn(std::uint64_t n, unsigned b) {
  if (b < 2) throw std::invalid_argument("kn: base must be >= 2");
  if (n == 0) throw std::invalid_argument("kn: n must be >= 1");
  unsigned k = 0;
  for (std::uint64_t m = n; m != 0; m /= b) ++k;
  return k;
}

// ---------------------------------------------------------------------------
// Direction numbers

/// One row of a Joe–Kuo style table: primitive polynomial of degree
/// `degree` with interior coefficients `coeffs` (a_1 is the most significant
/// bit), and initial direction integers m_1..m_degree.
struct DirectionEntry {
  unsigned degree = 0;
  std::uint32_t coeffs = 0;
  std::vector<std::uint32_t> m;
};

/// Direction-number table. Dimension 1 is implicit (identity matrix, i.e.
/// van der Corput in base 2); row k of the file describes dimension k + 2.
///
/// File format (whitespace separated, one dimension per line):
///
///     d       s       a       m_i
///     2       1       0       1
///     3       2       1       1 3
///
/// where d is the dimension (consecutive from 2), s the polynomial degree,
/// a the interior coefficients as an integer and m_i the s initial odd
/// direction integers with m_i < 2^i. A non-numeric first line is a header.
class DirectionTable {
 public:
  static DirectionTable parse(std::istream& in, const std::string& source = "<stream>") {
    DirectionTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto body = detail::trim(line);
      if (body.empty() || body.front() == '#') continue;
      if (lineno == 1 && !std::isdigit(static_cast<unsigned char>(body.front()))) continue;

      std::istringstream fields{std::string(body)};
      std::uint64_t dim = 0;
      DirectionEntry e;
      std::uint64_t coeffs = 0;
      auto fail = [&](const std::string& what) {
        return ParseError(source + ":" + std::to_string(lineno) + ": " + what);
      };
      if (!(fields >> dim >> e.degree >> coeffs)) throw fail("expected 'd s a m_1 ... m_s'");
      if (dim != table.entries_.size() + 2)
        throw fail("dimension " + std::to_string(dim) + " out of sequence (expected " +
                   std::to_string(table.entries_.size() + 2) + ")");
      if (e.degree == 0 || e.degree > 31) throw fail("degree s must be in 1..31");
      if (coeffs >= (std::uint64_t{1} << (e.degree - 1)) && e.degree > 1)
        throw fail("coefficient integer a too large for degree");
      e.coeffs = static_cast<std::uint32_t>(coeffs);
      for (unsigned i = 1; i <= e.degree; ++i) {
        std::uint64_t mi = 0;
        if (!(fields >> mi)) throw fail("missing m_" + std::to_string(i));
        if (mi % 2 == 0 || mi >= (std::uint64_t{1} << i))
          throw fail("m_" + std::to_string(i) + " must be odd and < 2^" + std::to_string(i));
        e.m.push_back(static_cast<std::uint32_t>(mi));
      }
      std::string extra;
      if (fields >> extra) throw fail("trailing field '" + extra + "'");
      table.entries_.push_back(std::move(e));
    }
    return table;
  }

  static DirectionTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open direction-number file '" + path + "'");
    return parse(in, path);
  }

  /// The bundled Joe–Kuo table (dimensions 1..1111).
  static const DirectionTable& bundled() {
    static const DirectionTable table = [] {
      std::istringstream in{std::string(detail::kJoeKuoTable)};
      return parse(in, "<bundled joe-kuo>");
    }();
    return table;
  }

  std::size_t max_dimension() const noexcept { return entries_.size() + 1; }

  /// Entry for dimension `dim` >= 2.
  const DirectionEntry& entry(std::size_t dim) const { return entries_.at(dim - 2); }

  /// Polynomial degree of dimension `dim`, with dimension 1 counted as 1.
  unsigned degree(std::size_t dim) const { return dim == 1 ? 1U : entry(dim).degree; }

 private:
  std::vector<DirectionEntry> entries_;
};

// ---------------------------------------------------------------------------
// Sobol' generator

/// Immutable Sobol' digital sequence in base 2, Gray-code ordering.
/// Points are integer numerators over 2^63 (`integer_point`), converted to
/// doubles by truncation to 53 bits, so no coordinate ever rounds up to 1.
class SobolGenerator {
 public:
  explicit SobolGenerator(std::size_t dimension, const DirectionTable& table = DirectionTable::bundled())
      : dim_(dimension) {
    if (dimension == 0) throw ConfigError("Sobol' dimension must be >= 1");
    if (dimension > table.max_dimension())
      throw ConfigError("Sobol' dimension " + std::to_string(dimension) +
                        " exceeds direction-number table (max " + std::to_string(table.max_dimension()) + ")");
    directions_.resize(dimension);
    t_value_ = 0;
    for (std::size_t j = 0; j < dimension; ++j) {
      auto& v = directions_[j];  // v[i] is direction number i+1
      if (j == 0) {
        for (unsigned i = 0; i < kSobolBits; ++i) v[i] = std::uint64_t{1} << (kSobolBits - 1 - i);
        continue;
      }
      const auto& e = table.entry(j + 1);
      const unsigned s = e.degree;
      t_value_ += s - 1;
      for (unsigned i = 0; i < kSobolBits; ++i) {
        if (i < s) {
          v[i] = std::uint64_t{e.m[i]} << (kSobolBits - 1 - i);
        } else {
          std::uint64_t x = v[i - s] ^ (v[i - s] >> s);
          for (unsigned k = 1; k < s; ++k)
            if ((e.coeffs >> (s - 1 - k)) & 1U) x ^= v[i - k];
          v[i] = x;
        }
      }
    }
  }

  std::size_t dimension() const noexcept { return dim_; }

  /// Guaranteed t-parameter of the first `dimension()` coordinates:
  /// sum over coordinates of (polynomial degree - 1).
  unsigned t_value() const noexcept { return t_value_; }

  /// Direction number `i` (1-based) of coordinate `j` (0-based).
  std::uint64_t direction(std::size_t j, unsigned i) const { return directions_.at(j).at(i - 1); }

  /// Integer digit state of point n (Gray-code index), n < 2^62.
  void integer_point(std::uint64_t n, std::span<std::uint64_t> out) const {
    if (out.size() != dim_) throw std::invalid_argument("integer_point: output has wrong dimension");
    if (n >= (std::uint64_t{1} << 62)) throw std::out_of_range("Sobol' index must be < 2^62");
    const std::uint64_t gray = n ^ (n >> 1);
    for (std::size_t j = 0; j < dim_; ++j) {
      std::uint64_t x = 0;
      for (std::uint64_t g = gray; g != 0; g &= g - 1) x ^= directions_[j][std::countr_zero(g)];
      out[j] = x;
    }
  }

  void point(std::uint64_t n, std::span<double> out) const {
    std::vector<std::uint64_t> raw(dim_);
    integer_point(n, raw);
    for (std::size_t j = 0; j < dim_; ++j) out[j] = to_unit(raw[j]);
  }

  std::vector<double> point(std::uint64_t n) const {
    std::vector<double> p(dim_);
    point(n, p);
    return p;
  }

  /// Numerator over 2^63 to double, truncating to 53 bits.
  static constexpr double to_unit(std::uint64_t numerator) noexcept {
    return static_cast<double>(numerator >> (kSobolBits - 53)) * 0x1.0p-53;
  }

 private:
  std::size_t dim_;
  unsigned t_value_ = 0;
  std::vector<std::array<std::uint64_t, kSobolBits>> directions_;

  friend class SobolCursor;
};

/// Sequential cursor over a SobolGenerator; O(d) per step.
/// Owned by one run; not for concurrent use.
class SobolCursor {
 public:
  explicit SobolCursor(SobolGenerator gen, std::uint64_t start = 0) : gen_(std::move(gen)), state_(gen_.dimension()) {
    seek(start);
  }

  void seek(std::uint64_t n) {
    index_ = n;
    gen_.integer_point(n, state_);
  }

  std::uint64_t index() const noexcept { return index_; }
  const SobolGenerator& generator() const noexcept { return gen_; }

  /// Integer state of the current point.
  std::span<const std::uint64_t> current() const noexcept { return state_; }

  void advance() {
    const unsigned c = static_cast<unsigned>(std::countr_zero(~index_));
    for (std::size_t j = 0; j < state_.size(); ++j) state_[j] ^= gen_.directions_[j][c];
    ++index_;
  }

 private:
  SobolGenerator gen_;
  std::vector<std::uint64_t> state_;
  std::uint64_t index_ = 0;
};

// ---------------------------------------------------------------------------
// Sequence configuration

enum class GeneratorKind { Sobol, VanDerCorput };

struct DigitalSequenceConfig {
  unsigned base = 2;
  std::size_t dimension = 1;
  unsigned t_param = 0;
  GeneratorKind kind = GeneratorKind::Sobol;
  std::shared_ptr<const DirectionTable> direction_numbers;  // null: bundled table

  void validate() const {
    if (base < 2) throw ConfigError("sequence base must be >= 2");
    if (dimension < 1) throw ConfigError("sequence dimension must be >= 1");
    if (kind == GeneratorKind::Sobol && base != 2) throw ConfigError("Sobol' sequences are base 2");
    if (kind == GeneratorKind::VanDerCorput && dimension != 1)
      throw ConfigError("van der Corput sequence is one-dimensional");
  }

  const DirectionTable& table() const {
    return direction_numbers ? *direction_numbers : DirectionTable::bundled();
  }
};

/// n-th point of the Sobol' sequence described by `config`.
inline std::vector<double> sobol_point(std::uint64_t n, const DigitalSequenceConfig& config) {
  config.validate();
  if (config.kind != GeneratorKind::Sobol) throw ConfigError("sobol_point: generator kind is not Sobol");
  return SobolGenerator(config.dimension, config.table()).point(n);
}

/// Points first..first+count-1 of the configured deterministic sequence.
inline PointSet generate_points(const DigitalSequenceConfig& config, std::uint64_t first, std::uint64_t count) {
  config.validate();
  PointSet out(config.dimension);
  if (config.kind == GeneratorKind::VanDerCorput) {
    for (std::uint64_t n = first; n < first + count; ++n) {
      const double v = radical_inverse(n, config.base);
      out.push_back(std::span<const double>(&v, 1));
    }
    return out;
  }
  SobolCursor cursor(SobolGenerator(config.dimension, config.table()), first);
  std::vector<double> p(config.dimension);
  for (std::uint64_t k = 0; k < count; ++k) {
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = SobolGenerator::to_unit(cursor.current()[j]);
    out.push_back(p);
    cursor.advance();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomization

/// Number of retained deterministic digits R; R = infinity is its own state.
class DigitCount {
 public:
  enum class Kind { Finite, Infinite };

  static constexpr DigitCount finite(unsigned r) noexcept { return DigitCount(Kind::Finite, r); }
  static constexpr DigitCount infinite() noexcept { return DigitCount(Kind::Infinite, 0); }

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr bool is_infinite() const noexcept { return kind_ == Kind::Infinite; }
  constexpr unsigned value() const {
    if (is_infinite()) throw std::logic_error("DigitCount::value on infinite R");
    return r_;
  }

  std::string to_string() const { return is_infinite() ? "inf" : std::to_string(r_); }

  friend constexpr bool operator==(const DigitCount&, const DigitCount&) = default;

 private:
  constexpr DigitCount(Kind k, unsigned r) noexcept : kind_(k), r_(r) {}
  Kind kind_;
  unsigned r_;
};

enum class RandomizationMode { DigitTruncation, AdditiveProxy };

struct RandomizationSpec {
  DigitCount r_digits = DigitCount::infinite();
  RandomizationMode mode = RandomizationMode::DigitTruncation;
  std::uint64_t rng_seed = 0;
};

/// Keep the first R base-b digits of each u_i and add b^-R z_i.
inline std::vector<double> randomize_digit_truncation(std::span<const double> u, DigitCount r, unsigned b,
                                                      std::span<const double> z) {
  if (u.size() != z.size()) throw std::invalid_argument("randomize_digit_truncation: size mismatch");
  if (b < 2) throw std::invalid_argument("randomize_digit_truncation: base must be >= 2");
  std::vector<double> out(u.begin(), u.end());
  if (r.is_infinite()) return out;
  const double scale = std::pow(static_cast<double>(b), static_cast<double>(r.value()));
  if (!std::isfinite(scale)) return out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double kept = std::floor(u[i] * scale) / scale;
    out[i] = std::min(kept + z[i] / scale, kBelowOne);
  }
  return out;
}

/// Rough proxy: u_i + b^(-R-1) z_i, clamped below one.
inline std::vector<double> randomize_additive_proxy(std::span<const double> u, DigitCount r, unsigned b,
                                                    std::span<const double> z) {
  if (u.size() != z.size()) throw std::invalid_argument("randomize_additive_proxy: size mismatch");
  if (b < 2) throw std::invalid_argument("randomize_additive_proxy: base must be >= 2");
  std::vector<double> out(u.begin(), u.end());
  if (r.is_infinite()) return out;
  const double scale = std::pow(static_cast<double>(b), -static_cast<double>(r.value()) - 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::clamp(u[i] + scale * z[i], 0.0, kBelowOne);
  return out;
}

/// Cursor over a (t,d)_R-sequence in base 2 built on Sobol'. Digits are
/// taken from the integer state; z draws come from a seeded Rng (none are
/// drawn when R is infinite).
class RandomizedSobolStream {
 public:
  RandomizedSobolStream(SobolGenerator gen, RandomizationSpec spec, std::uint64_t first = 0)
      : cursor_(std::move(gen), first), spec_(spec), rng_(spec.rng_seed) {}

  std::uint64_t index() const noexcept { return cursor_.index(); }
  std::size_t dimension() const noexcept { return cursor_.generator().dimension(); }

  /// Writes u_R^n for the current n and advances to n + 1.
  void next(std::span<double> out) {
    const auto raw = cursor_.current();
    if (spec_.r_digits.is_infinite()) {
      for (std::size_t j = 0; j < raw.size(); ++j) out[j] = SobolGenerator::to_unit(raw[j]);
    } else {
      const unsigned r = spec_.r_digits.value();
      for (std::size_t j = 0; j < raw.size(); ++j) {
        const double z = rng_.uniform();
        double v;
        if (spec_.mode == RandomizationMode::DigitTruncation) {
          if (r >= 53) {
            v = SobolGenerator::to_unit(raw[j]) + std::ldexp(z, -static_cast<int>(std::min(r, 1100U)));
          } else {
            const std::uint64_t keep = raw[j] & ~((std::uint64_t{1} << (kSobolBits - r)) - 1);
            v = SobolGenerator::to_unit(keep) + std::ldexp(z, -static_cast<int>(r));
          }
        } else {
          v = SobolGenerator::to_unit(raw[j]) + std::ldexp(z, -static_cast<int>(std::min(r, 1100U)) - 1);
        }
        out[j] = std::clamp(v, 0.0, kBelowOne);
      }
    }
    cursor_.advance();
  }

 private:
  SobolCursor cursor_;
  RandomizationSpec spec_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Net verification

/// One elementary interval prod_j [a_j b^-d_j, (a_j + 1) b^-d_j).
struct ElementaryBox {
  std::vector<std::pair<std::uint64_t, unsigned>> intervals;  // (a_j, d_j)
  std::uint64_t count = 0;
  std::uint64_t expected = 0;
};

struct NetCheckReport {
  bool is_net = false;
  unsigned m = 0;
  unsigned t_tested = 0;
  std::optional<ElementaryBox> violating_box;
};

namespace detail {

inline std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / b) throw std::overflow_error("integer power overflow");
    r *= b;
  }
  return r;
}

/// Index of the base-b interval of resolution b^-d containing u.
inline std::uint64_t box_coordinate(double u, unsigned b, std::uint64_t cells) {
  double x = u * static_cast<double>(cells);
  // Base-b fractions are inexact for b != 2; absorb representation error.
  if (b != 2) x += 1e-12 * static_cast<double>(cells);
  const auto a = static_cast<std::uint64_t>(std::floor(x));
  return std::min(a, cells - 1);
}

}  // namespace detail

/// Checks whether `points` is a (t, m, s)-net in base b by counting every
/// elementary interval of volume b^(t-m).
inline NetCheckReport verify_net(const PointSet& points, unsigned b, unsigned t, unsigned m, std::size_t s) {
  if (b < 2) throw std::invalid_argument("verify_net: base must be >= 2");
  if (t > m) throw std::invalid_argument("verify_net: t must be <= m");
  if (points.dimension() != s) throw std::invalid_argument("verify_net: point dimension differs from s");
  const std::uint64_t n_expected = detail::ipow(b, m);
  if (points.size() != n_expected)
    throw std::invalid_argument("verify_net: expected b^m = " + std::to_string(n_expected) + " points, got " +
                                std::to_string(points.size()));

  NetCheckReport report;
  report.m = m;
  report.t_tested = t;
  report.is_net = true;

  const unsigned total = m - t;
  const std::uint64_t per_box = detail::ipow(b, t);
  const std::uint64_t n_boxes = detail::ipow(b, total);
  std::vector<unsigned> depth(s, 0);
  std::vector<std::uint64_t> counts(n_boxes);
  std::vector<std::uint64_t> cells(s);

  auto check = [&]() {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t j = 0; j < s; ++j) cells[j] = detail::ipow(b, depth[j]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto p = points[i];
      std::uint64_t idx = 0;
      for (std::size_t j = 0; j < s; ++j) idx = idx * cells[j] + detail::box_coordinate(p[j], b, cells[j]);
      ++counts[idx];
    }
    for (std::uint64_t k = 0; k < n_boxes; ++k) {
      if (counts[k] == per_box) continue;
      ElementaryBox box;
      box.count = counts[k];
      box.expected = per_box;
      box.intervals.resize(s);
      std::uint64_t rest = k;
      for (std::size_t j = s; j-- > 0;) {
        box.intervals[j] = {rest % cells[j], depth[j]};
        rest /= cells[j];
      }
      report.is_net = false;
      report.violating_box = std::move(box);
      return false;
    }
    return true;
  };

  // Enumerate compositions depth[0] + ... + depth[s-1] = total.
  auto recurse = [&](auto&& self, std::size_t j, unsigned remaining) -> bool {
    if (j + 1 == s) {
      depth[j] = remaining;
      return check();
    }
    for (unsigned d = 0; d <= remaining; ++d) {
      depth[j] = d;
      if (!self(self, j + 1, remaining - d)) return false;
    }
    return true;
  };
  recurse(recurse, 0, total);
  return report;
}

// ---------------------------------------------------------------------------
// Coverage diagnostics

/// Grid estimate of the dispersion sup_x min_n ||x - u^n||_inf over [0,1]^d,
/// evaluated on the regular grid {k / (G - 1)}^d. This is a lower bound on
/// the true dispersion that converges as the grid is refined.
inline double dispersion_estimate(const PointSet& points, std::size_t grid_points_per_axis) {
  if (points.empty()) throw std::invalid_argument("dispersion_estimate: empty point set");
  if (grid_points_per_axis < 2) throw std::invalid_argument("dispersion_estimate: grid resolution must be >= 2");
  const std::size_t d = points.dimension();
  const double g_total = std::pow(static_cast<double>(grid_points_per_axis), static_cast<double>(d));
  if (g_total > 1e9) throw std::invalid_argument("dispersion_estimate: grid too large");

  const double step = 1.0 / static_cast<double>(grid_points_per_axis - 1);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d, 0.0);
  double worst = 0.0;
  while (true) {
    for (std::size_t j = 0; j < d; ++j) x[j] = static_cast<double>(idx[j]) * step;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size() && nearest > worst; ++i) {
      const auto p = points[i];
      double dist = 0.0;
      for (std::size_t j = 0; j < d && dist < nearest; ++j) dist = std::max(dist, std::abs(x[j] - p[j]));
      nearest = std::min(nearest, dist);
    }
    worst = std::max(worst, nearest);

    std::size_t j = 0;
    while (j < d && ++idx[j] == grid_points_per_axis) idx[j++] = 0;
    if (j == d) break;
  }
  return worst;
}

/// Exact star discrepancy by enumerating anchored boxes whose upper corners
/// come from point coordinates and 1. Both the closed-box count
/// (count/N - vol) and the open-box count (vol - count/N) are evaluated at
/// every candidate corner. Limited to N <= 1024 and d <= 3.
inline double star_discrepancy_bruteforce(const PointSet& points) {
  const std::size_t n = points.size();
  const std::size_t d = points.dimension();
  if (n == 0) throw std::invalid_argument("star_discrepancy_bruteforce: empty point set");
  if (n > 1024 || d > 3) throw std::invalid_argument("star_discrepancy_bruteforce: instance too large (N <= 1024, d <= 3)");

  std::vector<std::vector<double>> cand(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) cand[j].push_back(points[i][j]);
    cand[j].push_back(1.0);
    std::sort(cand[j].begin(), cand[j].end());
    cand[j].erase(std::unique(cand[j].begin(), cand[j].end()), cand[j].end());
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t last = d - 1;
  std::vector<std::size_t> corner(last, 0);
  std::vector<double> closed_last, open_last;
  double best = 0.0;

  while (true) {
    double vol_head = 1.0;
    for (std::size_t j = 0; j < last; ++j) vol_head *= cand[j][corner[j]];
    closed_last.clear();
    open_last.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = points[i];
      bool closed = true, open = true;
      for (std::size_t j = 0; j < last; ++j) {
        const double q = cand[j][corner[j]];
        closed = closed && p[j] <= q;
        open = open && p[j] < q;
      }
      if (closed) closed_last.push_back(p[last]);
      if (open) open_last.push_back(p[last]);
    }
    std::sort(closed_last.begin(), closed_last.end());
    std::sort(open_last.begin(), open_last.end());

    std::size_t ic = 0, io = 0;
    for (const double q : cand[last]) {
      while (ic < closed_last.size() && closed_last[ic] <= q) ++ic;
      while (io < open_last.size() && open_last[io] < q) ++io;
      const double vol = vol_head * q;
      best = std::max(best, static_cast<double>(ic) * inv_n - vol);
      best = std::max(best, vol - static_cast<double>(io) * inv_n);
    }

    std::size_t j = 0;
    while (j < last && ++corner[j] == cand[j].size()) corner[j++] = 0;
    if (j == last) break;
  }
  return best;
}

}  // namespace qmcsa
