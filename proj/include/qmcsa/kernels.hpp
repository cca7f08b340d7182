#pragma once

// Product Markov kernels with truncated Cauchy / Gaussian components, sampled
// through the inverse Rosenblatt transformation of a point in [0,1]^d.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmcsa/detail/special.hpp"
#include "qmcsa/errors.hpp"

namespace qmcsa {

enum class KernelFamily { Cauchy, Gaussian };

inline std::string to_string(KernelFamily f) { return f == KernelFamily::Cauchy ? "cauchy" : "gaussian"; }

/// Closed interval [lower, upper]; either end may be infinite.
struct Support {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool compact() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }
  bool contains(double x) const noexcept { return x >= lower && x <= upper; }
};

/// Location-scale distribution truncated to a support interval.
///
/// The CDF is computed in a form that avoids cancellation: Cauchy in angle
/// space (differences of arctangents), Gaussian in the lower or upper tail
/// depending on which side of the location the support lies.
class TruncatedDist {
 public:
  TruncatedDist(KernelFamily family, double location, double scale, Support support)
      : family_(family), location_(location), scale_(scale), support_(support) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("truncated distribution: scale must be > 0");
    if (!std::isfinite(location)) throw std::invalid_argument("truncated distribution: location must be finite");
    if (!(support.lower < support.upper)) throw std::invalid_argument("truncated distribution: need lower < upper");
    const double za = standardize(support.lower);
    const double zb = standardize(support.upper);
    if (family_ == KernelFamily::Cauchy) {
      lo_ = std::atan(za);
      hi_ = std::atan(zb);
    } else {
      upper_form_ = za > 0.0;
      lo_ = upper_form_ ? detail::normal_sf(za) : detail::normal_cdf(za);
      hi_ = upper_form_ ? detail::normal_sf(zb) : detail::normal_cdf(zb);
    }
    mass_ = upper_form_ ? lo_ - hi_ : hi_ - lo_;
    if (!(mass_ > 0.0)) throw DegenerateSupportError("truncated distribution: support carries no mass");
  }

  KernelFamily family() const noexcept { return family_; }
  double location() const noexcept { return location_; }
  double scale() const noexcept { return scale_; }
  const Support& support() const noexcept { return support_; }

  double cdf(double x) const {
    if (x <= support_.lower) return 0.0;
    if (x >= support_.upper) return 1.0;
    const double z = standardize(x);
    double f;
    if (family_ == KernelFamily::Cauchy) {
      f = (std::atan(z) - lo_) / mass_;
    } else if (upper_form_) {
      f = (lo_ - detail::normal_sf(z)) / mass_;
    } else {
      f = (detail::normal_cdf(z) - lo_) / mass_;
    }
    return std::clamp(f, 0.0, 1.0);
  }

  double density(double x) const {
    if (x < support_.lower || x > support_.upper) return 0.0;
    const double z = standardize(x);
    double base;
    if (family_ == KernelFamily::Cauchy) {
      base = 1.0 / (1.0 + z * z);  // derivative of atan(z) in z
    } else {
      base = detail::normal_pdf(z);
    }
    return base / (mass_ * scale_);
  }

  double inverse_cdf(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("trunc_inverse_cdf: u must lie in [0, 1]");
    if (u == 0.0) {
      if (std::isfinite(support_.lower)) return support_.lower;
      u = std::numeric_limits<double>::denorm_min();
    }
    if (u == 1.0) {
      if (std::isfinite(support_.upper)) return support_.upper;
      u = std::nextafter(1.0, 0.0);
    }

    double z;
    if (family_ == KernelFamily::Cauchy) {
      const double theta = lo_ + u * mass_;
      z = std::tan(theta);
    } else if (upper_form_) {
      z = -detail::normal_quantile(lo_ - u * mass_);
    } else {
      z = detail::normal_quantile(lo_ + u * mass_);
    }
    double y = std::clamp(location_ + scale_ * z, support_.lower, support_.upper);

    // One Newton step against the truncated CDF.
    if (std::isfinite(y)) {
      const double dens = density(y);
      if (dens > 0.0 && std::isfinite(dens)) {
        const double step = (cdf(y) - u) / dens;
        if (std::isfinite(step)) y = std::clamp(y - step, support_.lower, support_.upper);
      }
    }
    if (!std::isfinite(y)) y = std::clamp(y, std::numeric_limits<double>::lowest(), std::numeric_limits<double>::max());
    return y;
  }

 private:
  double standardize(double x) const noexcept { return (x - location_) / scale_; }

  KernelFamily family_;
  double location_;
  double scale_;
  Support support_;
  bool upper_form_ = false;
  double lo_ = 0.0;  // atan(za), Phi(za) or S(za)
  double hi_ = 0.0;
  double mass_ = 0.0;
};

inline double trunc_cdf(const TruncatedDist& dist, double x) { return dist.cdf(x); }
inline double trunc_inverse_cdf(const TruncatedDist& dist, double u) { return dist.inverse_cdf(u); }

/// One coordinate of a product kernel; the location is bound at sampling
/// time to the current state coordinate.
struct KernelComponent {
  KernelFamily family = KernelFamily::Cauchy;
  double scale = 1.0;
  Support support;
};

class ProductKernel {
 public:
  ProductKernel() = default;
  explicit ProductKernel(std::vector<KernelComponent> components) : components_(std::move(components)) {
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const auto& c = components_[i];
      if (!(c.scale > 0.0) || !std::isfinite(c.scale))
        throw std::invalid_argument("kernel component " + std::to_string(i) + ": scale must be > 0");
      if (!(c.support.lower < c.support.upper))
        throw std::invalid_argument("kernel component " + std::to_string(i) + ": need lower < upper");
    }
  }

  /// Same family and scale on every coordinate.
  static ProductKernel uniform(std::size_t dimension, KernelFamily family, double scale, Support support) {
    return ProductKernel(std::vector<KernelComponent>(dimension, KernelComponent{family, scale, support}));
  }

  std::size_t dimension() const noexcept { return components_.size(); }
  const KernelComponent& component(std::size_t i) const { return components_.at(i); }
  std::span<const KernelComponent> components() const noexcept { return components_; }

  /// Truncated distribution of coordinate i centred at `location`.
  TruncatedDist at(std::size_t i, double location) const {
    const auto& c = components_.at(i);
    return TruncatedDist(c.family, location, c.scale, c.support);
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dimension()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!components_[i].support.contains(x[i])) return false;
    return true;
  }

 private:
  std::vector<KernelComponent> components_;
};

/// Inverse Rosenblatt transform of K(x, .) at u. Components are independent
/// given x, so the transform factorizes coordinate-wise.
inline void sample_kernel(const ProductKernel& kernel, std::span<const double> x, std::span<const double> u,
                          std::span<double> y) {
  const std::size_t d = kernel.dimension();
  if (x.size() != d || u.size() != d || y.size() != d)
    throw std::invalid_argument("sample_kernel: dimension mismatch");
  for (std::size_t i = 0; i < d; ++i) y[i] = kernel.at(i, x[i]).inverse_cdf(u[i]);
}

inline std::vector<double> sample_kernel(const ProductKernel& kernel, std::span<const double> x,
                                         std::span<const double> u) {
  std::vector<double> y(kernel.dimension());
  sample_kernel(kernel, x, u, y);
  return y;
}

}  // namespace qmcsa
