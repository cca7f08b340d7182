#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qmcsa/objectives.hpp"
#include "qmcsa/rng.hpp"

using namespace qmcsa;

namespace {

long double toy_ref(long double x1, long double x2) {
  const long double a = x1 * sinl(20 * x2) + x2 * sinl(20 * x1);
  const long double b = x1 * cosl(10 * x2) - x2 * sinl(10 * x1);
  return a * a * coshl(sinl(10 * x1) * x1) + b * b * coshl(sinl(20 * x2) * x2);
}

double gamma_ref(double phi1, double phi2, const std::array<double, 3>& p, const std::array<double, 3>& q) {
  return phi1 * (1.0 - std::exp(-std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]) / phi2));
}

}  // namespace

TEST(Toy, Examples) {
  EXPECT_EQ(toy_phi1(0.0, 0.0), 0.0);
  for (double x = -0.01; x <= 0.01; x += 0.001) EXPECT_GE(toy_phi1(x, x), 0.0);
  const double v = toy_phi1(1.0, 1.0);
  EXPECT_NEAR(v, static_cast<double>(toy_ref(1.0L, 1.0L)), 1e-12 * std::abs(v));
}

TEST(Toy, NonnegativeAndMatchesReferenceOnGrid) {
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) {
      const double x1 = i / 20.0, x2 = j / 20.0;
      const double v = toy_phi1(x1, x2);
      EXPECT_GE(v, 0.0);
      EXPECT_NEAR(v, static_cast<double>(toy_ref(x1, x2)), 1e-12 * std::max(1.0, v));
    }
}

TEST(Toy, OutsideDomainThrows) { EXPECT_THROW(toy_phi1(1.5, 0.0), std::invalid_argument); }

TEST(Objective, MinimizeIsNegated) {
  const auto obj = make_toy_objective();
  const std::vector<double> x{0.3, -0.2};
  EXPECT_EQ(obj(x), -toy_phi1(0.3, -0.2));
  EXPECT_EQ(obj.raw(x), toy_phi1(0.3, -0.2));
  EXPECT_EQ(obj.reported(obj(x)), obj.raw(x));
  EXPECT_EQ(obj.dimension(), 2u);
}

TEST(Variogram, Examples) {
  const std::array<double, 3> p{0.1, 0.2, 0.3};
  EXPECT_EQ(variogram_gamma(1.0, 1.0, p, p), 0.0);
  const std::array<double, 3> far{50.1, 0.2, 0.3};
  EXPECT_NEAR(variogram_gamma(2.0, 1.0, p, far), 2.0, 1e-12);
  const std::array<double, 3> unit{1.1, 0.2, 0.3};
  EXPECT_NEAR(variogram_gamma(1.0, 1.0, p, unit), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(1.0 - std::exp(-1.0), 0.6321206, 1e-7);
}

TEST(Variogram, BoundedAndIncreasing) {
  const std::array<double, 3> o{0, 0, 0};
  double prev = -1.0;
  for (double h = 0.0; h < 20.0; h += 0.1) {
    const std::array<double, 3> q{h, 0, 0};
    const double g = variogram_gamma(1.5, 0.7, o, q);
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.5 + 1e-15);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(SpatialObjective, ExactFitIsZero) {
  const std::vector<std::array<double, 2>> locs{{0, 0}, {1, 0}, {0, 2}, {0.5, 0.5}};
  const std::vector<double> z{0, 0, 0, 0};
  Eigen::MatrixXd vm(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      vm(i, j) = gamma_ref(1.3, 0.8, {locs[i][0], locs[i][1], 0.0}, {locs[j][0], locs[j][1], 0.0});
  EXPECT_NEAR(spatial_objective(1.3, 0.8, z, vm, locs, 0.1), 0.0, 1e-28);
}

TEST(SpatialObjective, MatchesPairwiseLoop) {
  const std::vector<std::array<double, 2>> locs{{0.1, -0.3}, {0.7, 0.2}, {-0.5, 0.4}};
  const std::vector<double> z{0.3, -0.8, 0.05};
  Eigen::MatrixXd vm(3, 3);
  vm << 0.0, 0.9, 1.4, 0.9, 0.0, 0.6, 1.4, 0.6, 0.0;
  const double phi1 = 1.7, phi2 = 0.4, lambda = 0.01;
  double ref = lambda * (0.3 + 0.8 + 0.05);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double r = vm(i, j) - gamma_ref(phi1, phi2, {locs[i][0], locs[i][1], z[i]}, {locs[j][0], locs[j][1], z[j]});
      ref += r * r;
    }
  EXPECT_NEAR(spatial_objective(phi1, phi2, z, vm, locs, lambda), ref, 1e-14);
}

TEST(SpatialObjective, SignFlipInvariance) {
  Rng rng(4);
  std::vector<std::array<double, 2>> locs(6);
  std::vector<double> z(6), mz(6);
  for (int i = 0; i < 6; ++i) {
    locs[i] = {rng.uniform(), rng.uniform()};
    z[i] = rng.normal();
    mz[i] = -z[i];
  }
  Eigen::MatrixXd vm = Eigen::MatrixXd::Random(6, 6).cwiseAbs();
  vm = (vm + vm.transpose()).eval();
  EXPECT_EQ(spatial_objective(1.0, 0.5, z, vm, locs, 0.1), spatial_objective(1.0, 0.5, mz, vm, locs, 0.1));
}

TEST(SpatialObjective, FlatStateWrapper) {
  const std::vector<std::array<double, 2>> locs{{0, 0}, {1, 0}, {0, 1}};
  Eigen::MatrixXd vm = Eigen::MatrixXd::Constant(3, 3, 0.5);
  const auto obj = make_spatial_objective(locs, vm, 0.1);
  EXPECT_EQ(obj.dimension(), 5u);
  EXPECT_EQ(obj.lower()[0], 0.0);
  EXPECT_TRUE(std::isinf(obj.lower()[2]));
  const std::vector<double> x{1.0, 2.0, 0.1, 0.2, 0.3};
  EXPECT_EQ(obj.raw(x), spatial_objective(1.0, 2.0, std::vector<double>{0.1, 0.2, 0.3}, vm, locs, 0.1));
  EXPECT_THROW(obj.raw(std::vector<double>{1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(make_spatial_objective(locs, vm, 0.0), std::invalid_argument);
}

TEST(DispersionMatrix, Examples) {
  EXPECT_TRUE(spatial_dispersion_matrix(Eigen::MatrixXd::Constant(5, 3, 2.0)).isZero());
  Eigen::MatrixXd y1(1, 2);
  y1 << 0.0, 1.0;
  EXPECT_DOUBLE_EQ(spatial_dispersion_matrix(y1)(0, 1), 1.0);
  Eigen::MatrixXd y2(2, 2);
  y2 << 0.0, 0.0, 2.0, 2.0;
  EXPECT_DOUBLE_EQ(spatial_dispersion_matrix(y2)(0, 1), 2.0);
}

TEST(DispersionMatrix, MatchesDoubleSumAndIsSymmetric) {
  Rng rng(9);
  Eigen::MatrixXd y(7, 4);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 4; ++c) y(r, c) = rng.normal() + c;
  const auto v = spatial_dispersion_matrix(y);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int m = 0; m < 7; ++m)
        for (int mp = 0; mp < 7; ++mp) s += (y(m, i) - y(mp, j)) * (y(m, i) - y(mp, j));
      EXPECT_NEAR(v(i, j), s / 49.0, 1e-12);
      EXPECT_EQ(v(i, j), v(j, i));
      EXPECT_GE(v(i, j), 0.0);
    }
  Eigen::MatrixXd shuffled = y.colwise().reverse();
  EXPECT_TRUE(spatial_dispersion_matrix(shuffled).isApprox(v, 1e-14));
}
