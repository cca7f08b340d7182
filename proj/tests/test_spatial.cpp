#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qmcsa/objectives.hpp"
#include "qmcsa/spatial.hpp"

using namespace qmcsa;

namespace {

double ellipsoid_residual(const std::array<double, 3>& p, const EllipsoidAxes& ax) {
  const double x = p[0] / ax.a, y = p[1] / ax.b, z = p[2] / ax.c;
  return x * x + y * y + z * z - 1.0;
}

}  // namespace

TEST(Locations, LieOnUpperHalfEllipsoid) {
  for (const EllipsoidAxes ax : {EllipsoidAxes{}, EllipsoidAxes{2.0, 0.5, 3.0}}) {
    const auto locs = gen_locations(200, ax, 17);
    ASSERT_EQ(locs.lifted.size(), 200u);
    for (std::size_t i = 0; i < locs.lifted.size(); ++i) {
      const auto& p = locs.lifted[i];
      EXPECT_NEAR(ellipsoid_residual(p, ax), 0.0, 1e-12);
      EXPECT_GE(p[2], 0.0);
      EXPECT_EQ(p[0], locs.planar[i][0]);
      EXPECT_EQ(p[1], locs.planar[i][1]);
    }
  }
}

TEST(Locations, ApexAndDeterminism) {
  const EllipsoidAxes ax;
  EXPECT_EQ(lift_to_ellipsoid(0.0, 0.0, ax)[2], ax.c);
  const auto a = gen_locations(100, ax, 5);
  const auto b = gen_locations(100, ax, 5);
  const auto c = gen_locations(100, ax, 6);
  EXPECT_EQ(a.lifted, b.lifted);
  EXPECT_NE(a.lifted, c.lifted);
  EXPECT_THROW(gen_locations(1, ax, 5), std::invalid_argument);
}

TEST(Covariance, UnitMarginalVariance) {
  const std::array<double, 3> p{0.2, 0.1, 0.4};
  EXPECT_EQ(exponential_covariance(1.0, 1.0, p, p), 1.0);
}

TEST(SimulateGp, SampleCovarianceMatchesModel) {
  const auto locs = gen_locations(5, EllipsoidAxes{}, 3).lifted;
  const std::size_t m = 5000;
  const auto y = simulate_gp(locs, 1.0, 1.0, m, 123);
  ASSERT_EQ(y.rows(), static_cast<Eigen::Index>(m));
  ASSERT_EQ(y.cols(), 5);
  const double tol = 5.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE(std::abs(y.col(i).mean()), tol);
    for (int j = 0; j < 5; ++j) {
      const double cov = (y.col(i).array() * y.col(j).array()).mean();
      EXPECT_NEAR(cov, exponential_covariance(1.0, 1.0, locs[i], locs[j]), tol) << i << "," << j;
    }
  }
}

TEST(SimulateGp, DispersionMatrixLimits) {
  // The all-pairs estimator mixes independent replicates (m != m'), so it
  // tends to Var_i + Var_j = 2 phi1. The paired estimator
  // M^-1 sum_m (y_mi - y_mj)^2 tends to 2 gamma.
  const auto locs = gen_locations(5, EllipsoidAxes{}, 8).lifted;
  const auto y = simulate_gp(locs, 1.0, 1.0, 5000, 77);
  const auto v = spatial_dispersion_matrix(y);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      EXPECT_NEAR(v(i, j), 2.0, 0.2) << i << "," << j;
      const double two_gamma =
          2.0 * variogram_gamma(1.0, 1.0, std::span<const double, 3>(locs[i]), std::span<const double, 3>(locs[j]));
      const double paired = (y.col(i) - y.col(j)).squaredNorm() / static_cast<double>(y.rows());
      EXPECT_NEAR(paired, two_gamma, 0.1 * two_gamma) << i << "," << j;
    }
}

TEST(SimulateGp, SeededAndValidated) {
  const auto locs = gen_locations(4, EllipsoidAxes{}, 1).lifted;
  EXPECT_EQ(simulate_gp(locs, 1.0, 1.0, 10, 5), simulate_gp(locs, 1.0, 1.0, 10, 5));
  EXPECT_THROW(simulate_gp(locs, 1.0, 1.0, 1, 5), std::invalid_argument);
  EXPECT_THROW(simulate_gp(locs, -1.0, 1.0, 10, 5), std::invalid_argument);
}

TEST(SimulateGp, CoincidentLocationsNeedJitter) {
  // Two identical locations make the covariance singular; the jitter ladder
  // must still factorize it.
  const std::vector<std::array<double, 3>> locs{{0, 0, 0.5}, {0, 0, 0.5}, {0.3, 0, 0.4}};
  const auto y = simulate_gp(locs, 1.0, 1.0, 20, 2);
  EXPECT_TRUE(y.allFinite());
  EXPECT_NEAR(y(0, 0), y(0, 1), 1e-4);
}

TEST(Dataset, RoundTripIsBitExact) {
  const auto ds = make_dataset(10, 50, 1.0, 1.0, EllipsoidAxes{}, 42);
  EXPECT_TRUE(ds.observations.allFinite());
  std::stringstream ss;
  save_dataset(ss, ds);
  const auto back = load_dataset(ss);
  EXPECT_TRUE(back == ds);
  std::stringstream again;
  save_dataset(again, back);
  EXPECT_EQ(again.str(), ss.str());
  EXPECT_TRUE(make_dataset(10, 50, 1.0, 1.0, EllipsoidAxes{}, 42) == ds);
}

TEST(Dataset, TruncatedFileIsParseError) {
  const auto ds = make_dataset(4, 5, 1.0, 1.0, EllipsoidAxes{}, 1);
  std::stringstream ss;
  save_dataset(ss, ds);
  std::string text = ss.str();
  text.resize(text.size() / 2);
  text.resize(text.rfind('\n') + 1);
  std::istringstream in(text);
  EXPECT_THROW(load_dataset(in, "half.txt"), ParseError);
}

TEST(Dataset, FutureVersionIsRejected) {
  std::istringstream in(
      "qmcsa-spatial-dataset version=99 d1=2 M=2 phi1=1 phi2=1 a=1 b=1 c=0.5 seed=0\nlocations x y X Y Z\n");
  try {
    load_dataset(in, "future.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported dataset version 99"), std::string::npos) << e.what();
  }
}

TEST(Dataset, BadNumberReportsLine) {
  std::istringstream in(
      "qmcsa-spatial-dataset version=1 d1=2 M=2 phi1=1 phi2=1 a=1 b=1 c=0.5 seed=0\nlocations x y X Y Z\n"
      "0 0 0 0 0.5\n0.1 oops 0.1 0 0.4\n");
  try {
    load_dataset(in, "bad.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.txt:4"), std::string::npos) << e.what();
  }
}

TEST(Dataset, LocationSd) {
  SpatialDataset ds;
  ds.locations2d = {{0, 0}, {1, 1}};
  ds.observations.resize(2, 2);
  ds.observations << 1.0, 5.0, 3.0, 5.0;
  const auto sd = ds.location_sd();
  EXPECT_DOUBLE_EQ(sd[0], 1.0);
  EXPECT_DOUBLE_EQ(sd[1], 0.0);
}
