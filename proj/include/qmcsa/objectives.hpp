#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace qmcsa {

enum class Sense { Maximize, Minimize };

/// Objective contract. Engines maximize; `operator()` returns the
/// maximize-sense value phi (the negated raw value for Minimize problems).
class Objective {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  Objective(std::string name, std::vector<double> lower, std::vector<double> upper, Evaluator f, Sense sense)
      : name_(std::move(name)), lower_(std::move(lower)), upper_(std::move(upper)), f_(std::move(f)), sense_(sense) {
    if (lower_.size() != upper_.size() || lower_.empty())
      throw std::invalid_argument("objective: domain bounds must be nonempty and of equal length");
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return lower_.size(); }
  Sense sense() const noexcept { return sense_; }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }

  /// Raw objective value in the problem's own sense.
  double raw(std::span<const double> x) const { return f_(x); }

  /// Maximize-sense value.
  double operator()(std::span<const double> x) const {
    const double v = f_(x);
    return sense_ == Sense::Minimize ? -v : v;
  }

  /// Maps a maximize-sense value back to the problem's sense.
  double reported(double phi) const noexcept { return sense_ == Sense::Minimize ? -phi : phi; }

  bool in_domain(std::span<const double> x) const {
    if (x.size() != dimension()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    return true;
  }

 private:
  std::string name_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  Evaluator f_;
  Sense sense_;
};

// ---------------------------------------------------------------------------
// Bivariate test function on [-1, 1]^2 with unique global minimum 0 at the
// origin and many local minima.

inline double toy_phi1(double x1, double x2) {
  if (!(x1 >= -1.0 && x1 <= 1.0 && x2 >= -1.0 && x2 <= 1.0))
    throw std::invalid_argument("toy_phi1: arguments must lie in [-1, 1]^2");
  const double a = x1 * std::sin(20.0 * x2) + x2 * std::sin(20.0 * x1);
  const double b = x1 * std::cos(10.0 * x2) - x2 * std::sin(10.0 * x1);
  return a * a * std::cosh(std::sin(10.0 * x1) * x1) + b * b * std::cosh(std::sin(20.0 * x2) * x2);
}

inline Objective make_toy_objective() {
  return Objective(
      "toy", {-1.0, -1.0}, {1.0, 1.0},
      [](std::span<const double> x) {
        if (x.size() != 2) throw std::invalid_argument("toy objective is two-dimensional");
        return toy_phi1(x[0], x[1]);
      },
      Sense::Minimize);
}

// ---------------------------------------------------------------------------
// Variogram fitting by dimension expansion

/// Exponential variogram phi1 (1 - exp(-||p - q||_2 / phi2)).
inline double variogram_gamma(double phi1, double phi2, std::span<const double, 3> p, std::span<const double, 3> q) {
  const double dx = p[0] - q[0];
  const double dy = p[1] - q[1];
  const double dz = p[2] - q[2];
  const double h = std::sqrt(dx * dx + dy * dy + dz * dz);
  return phi1 * -std::expm1(-h / phi2);
}

/// Sum over pairs i < j of (vM_ij - gamma([x_i, z_i], [x_j, z_j]))^2 plus
/// lambda ||z||_1.
inline double spatial_objective(double phi1, double phi2, std::span<const double> z, const Eigen::MatrixXd& vm,
                                std::span<const std::array<double, 2>> locs, double lambda) {
  const std::size_t d1 = z.size();
  if (locs.size() != d1 || static_cast<std::size_t>(vm.rows()) != d1 || static_cast<std::size_t>(vm.cols()) != d1)
    throw std::invalid_argument("spatial_objective: dimension mismatch between z, locations and vM");
  double total = 0.0;
  for (std::size_t i = 0; i < d1; ++i) {
    const std::array<double, 3> p{locs[i][0], locs[i][1], z[i]};
    for (std::size_t j = i + 1; j < d1; ++j) {
      const std::array<double, 3> q{locs[j][0], locs[j][1], z[j]};
      const double r = vm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                       variogram_gamma(phi1, phi2, std::span<const double, 3>(p), std::span<const double, 3>(q));
      total += r * r;
    }
  }
  double l1 = 0.0;
  for (const double zi : z) l1 += std::abs(zi);
  return total + lambda * l1;
}

/// v_ij = M^-2 sum_{m, m'} (y_{m,i} - y_{m',j})^2 over all ordered pairs of
/// replicates, evaluated as var_i + var_j + (mean_i - mean_j)^2 with
/// population variances (identical up to rounding, never negative).
inline Eigen::MatrixXd spatial_dispersion_matrix(const Eigen::MatrixXd& y) {
  if (y.rows() == 0 || y.cols() == 0) throw std::invalid_argument("spatial_dispersion_matrix: empty observation matrix");
  const Eigen::Index d1 = y.cols();
  const Eigen::VectorXd mean = y.colwise().mean().transpose();
  Eigen::VectorXd var(d1);
  for (Eigen::Index i = 0; i < d1; ++i) var(i) = (y.col(i).array() - mean(i)).square().mean();
  Eigen::MatrixXd v(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = i; j < d1; ++j) {
      const double dm = mean(i) - mean(j);
      v(i, j) = v(j, i) = var(i) + var(j) + dm * dm;
    }
  }
  return v;
}

/// Spatial objective over the flat state (phi1, phi2, z_1..z_d1), minimized.
inline Objective make_spatial_objective(std::vector<std::array<double, 2>> locs, Eigen::MatrixXd vm, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("spatial objective: lambda must be > 0");
  const std::size_t d1 = locs.size();
  if (d1 < 2) throw std::invalid_argument("spatial objective: need at least two locations");
  if (static_cast<std::size_t>(vm.rows()) != d1 || static_cast<std::size_t>(vm.cols()) != d1)
    throw std::invalid_argument("spatial objective: vM must be d1 x d1");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lower(d1 + 2, -inf);
  std::vector<double> upper(d1 + 2, inf);
  lower[0] = lower[1] = 0.0;
  auto state = std::make_shared<const std::pair<std::vector<std::array<double, 2>>, Eigen::MatrixXd>>(std::move(locs),
                                                                                                       std::move(vm));
  return Objective(
      "spatial", std::move(lower), std::move(upper),
      [state, lambda](std::span<const double> x) {
        if (x.size() != state->first.size() + 2) throw std::invalid_argument("spatial objective: state has wrong dimension");
        return spatial_objective(x[0], x[1], x.subspan(2), state->second, state->first, lambda);
      },
      Sense::Minimize);
}

}  // namespace qmcsa
