#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "specflow/spectrum/fd_laplacian.hpp"
#include "specflow/spectrum/lanczos.hpp"
#include "specflow/spectrum/spectrum.hpp"

using namespace specflow;
using namespace specflow::spectral;

namespace {

constexpr double pi = std::numbers::pi;

template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

/// Exact 5-point eigenvalues on the unit square with spacing 1/cells.
std::vector<double> discrete_square_levels(std::size_t cells) {
  std::vector<double> out;
  const double h = 1.0 / static_cast<double>(cells);
  for (std::size_t j = 1; j < cells; ++j)
    for (std::size_t k = 1; k < cells; ++k) {
      const double sj = std::sin(j * pi * h / 2), sk = std::sin(k * pi * h / 2);
      out.push_back(4.0 / (h * h) * (sj * sj + sk * sk));
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(RectangleSpectrum, FirstEigenvalue) {
  EXPECT_NEAR(rectangle_spectrum(1, 1, 100)[0], 2 * pi * pi, 1e-12);
  EXPECT_NEAR(2 * pi * pi, 19.7392, 1e-4);
}

TEST(RectangleSpectrum, CountsMatchEnumeration) {
  const auto s100 = rectangle_spectrum(1, 1, 100);
  const auto ref = oracle::rectangle_levels(1, 1, 100);
  ASSERT_EQ(ref.size(), 6u);
  ASSERT_EQ(s100.size(), 6u);
  const std::vector<double> expected = {2, 5, 5, 8, 10, 10};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s100[i], expected[i] * pi * pi, 1e-10);
  EXPECT_EQ(oracle::rectangle_levels(1, 1, 200).size(), 13u);
  EXPECT_EQ(rectangle_spectrum(1, 1, 200).size(), 13u);
  EXPECT_EQ(rectangle_spectrum(1.3, 0.7, 5000).size(), oracle::rectangle_levels(1.3, 0.7, 5000).size());
}

TEST(RectangleSpectrum, MemoryGuard) {
  EnumerationLimits lim;
  lim.max_count = 1000;
  EXPECT_EQ(code_of([&] { rectangle_spectrum(1, 1, 1e6, lim); }), ErrorCode::CutoffTooLarge);
}

TEST(BesselZeros, MatchSeriesBisection) {
  EXPECT_NEAR(bessel_j_zero(0, 1), oracle::bessel_zero(0, 1), 1e-8);
  EXPECT_NEAR(bessel_j_zero(1, 1), oracle::bessel_zero(1, 1), 1e-8);
  EXPECT_NEAR(bessel_j_zero(0, 2), oracle::bessel_zero(0, 2), 1e-8);
  EXPECT_NEAR(bessel_j_zero(0, 1), 2.404825558, 1e-8);
  EXPECT_NEAR(bessel_j_zero(1, 1), 3.831705970, 1e-8);
  EXPECT_NEAR(bessel_j_zero(0, 2), 5.520078110, 1e-8);
}

TEST(BesselZeros, RelativeAccuracyAcrossOrders) {
  for (int m : {0, 2, 5, 9})
    for (int k : {1, 2, 3}) {
      const double ref = oracle::bessel_zero(m, k);
      EXPECT_NEAR(bessel_j_zero(m, k) / ref, 1.0, 1e-10) << m << "," << k;
    }
}

TEST(DiskSpectrum, LowestLevels) {
  const auto s = disk_spectrum(1, 100);
  EXPECT_NEAR(s[0], 5.7832, 1e-4);
  EXPECT_NEAR(s[0], std::pow(oracle::bessel_zero(0, 1), 2), 1e-6);
  EXPECT_NEAR(s[1], 14.6820, 1e-4);
  EXPECT_DOUBLE_EQ(s[1], s[2]);
  EXPECT_NEAR(disk_spectrum(2, 100)[0], 1.4458, 1e-4);
}

TEST(FdSpectrum, UnitSquareLowestWithinHalfPercent) {
  const auto s = fd_dirichlet_spectrum(DomainMask::square(1.0, 128), 10);
  EXPECT_LT(std::abs(s[0] - 2 * pi * pi) / (2 * pi * pi), 5e-3);
  const auto exact = discrete_square_levels(128);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(s[i] / exact[i], 1.0, 1e-9) << i;
}

TEST(FdSpectrum, UnitDiskLowestWithinOnePercent) {
  const auto s = fd_dirichlet_spectrum(DomainMask::disk(1.0, 1.0 / 128), 1);
  const double exact = std::pow(oracle::bessel_zero(0, 1), 2);
  EXPECT_LT(std::abs(s[0] - exact) / exact, 1e-2);
}

TEST(FdSpectrum, DisconnectedMaskIsRejected) {
  std::vector<std::uint8_t> cells(9 * 9, 0);
  cells[2 * 9 + 2] = cells[2 * 9 + 3] = 1;
  cells[6 * 9 + 6] = 1;
  EXPECT_EQ(code_of([&] { fd_dirichlet_spectrum(DomainMask(9, 9, 0.1, cells), 1); }), ErrorCode::NotConnected);
}

TEST(FdSpectrum, DenseAndLanczosPathsAgree) {
  const auto mask = DomainMask::square(1.0, 48);  // 47^2 = 2209 interior points
  FdOptions dense;
  dense.dense_threshold = 10000;
  FdOptions sparse;
  sparse.dense_threshold = 0;
  const auto a = fd_dirichlet_spectrum(mask, 8, dense);
  const auto b = fd_dirichlet_spectrum(mask, 8, sparse);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(a[i] / b[i], 1.0, 1e-9);
}

TEST(Lanczos, MatchesDenseSolverWithMultiplicity) {
  const Eigen::Index n = 300;
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return nd(gen); });
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  const Eigen::MatrixXd basis = qr.householderQ();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = 1.0 + static_cast<double>(i) / 10.0;
  d[n - 1] = d[n - 2] = d[n - 3] = 50.0;  // threefold top eigenvalue
  const Eigen::MatrixXd a = basis * d.asDiagonal() * basis.transpose();
  auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; };
  const auto res = lanczos_largest(apply, static_cast<std::size_t>(n), 5);
  ASSERT_EQ(res.values.size(), 5u);
  EXPECT_NEAR(res.values[0], 50.0, 1e-8);
  EXPECT_NEAR(res.values[1], 50.0, 1e-8);
  EXPECT_NEAR(res.values[2], 50.0, 1e-8);
  EXPECT_NEAR(res.values[3], d[n - 4], 1e-8);
  EXPECT_NEAR(res.values[4], d[n - 5], 1e-8);
}

TEST(Lanczos, SeedDeterminesResultBitwise) {
  const auto mask = DomainMask::square(1.0, 50);
  FdOptions opt;
  opt.dense_threshold = 0;
  opt.lanczos.seed = 99;
  const auto a = fd_dirichlet_spectrum(mask, 4, opt);
  const auto b = fd_dirichlet_spectrum(mask, 4, opt);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(CountingFunction, EnumeratedValues) {
  const auto s = rectangle_spectrum(1, 1, 300);
  EXPECT_EQ(counting_function(s, 100), 6u);
  EXPECT_EQ(counting_function(s, 10), 0u);
  EXPECT_EQ(code_of([&] { counting_function(s, 301); }), ErrorCode::BeyondCompleteness);
}

TEST(DensityOfStates, EnumeratedValues) {
  const auto s = rectangle_spectrum(1, 1, 300);
  EXPECT_NEAR(density_of_states(s, 100, 100), 0.07, 1e-15);
  EXPECT_EQ(density_of_states(s, 1, 5), 0.0);
  const auto big = rectangle_spectrum(1, 1, 1.01e5 + 1);
  EXPECT_NEAR(density_of_states(big, 1e5, 1e3) / (1 / (4 * pi)), 1.0, 0.05);
}

// Properties.

TEST(SpectrumProperty, DiskExceedsCircumscribingSquare) {
  const auto disk = disk_spectrum(1, 500);
  const auto square = rectangle_spectrum(2, 2, 500);
  EXPECT_GT(disk[0], square[0]);
  EXPECT_NEAR(square[0], pi * pi / 2, 1e-12);
  for (std::size_t i = 0; i < disk.size(); ++i) EXPECT_GE(disk[i], square[i]);
}

TEST(SpectrumProperty, FdConvergesAtSecondOrder) {
  std::vector<double> err;
  for (std::size_t cells : {32u, 64u, 128u, 256u})
    err.push_back(std::abs(fd_dirichlet_spectrum(DomainMask::square(1.0, cells), 1)[0] - 2 * pi * pi));
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    EXPECT_GE(err[i] / err[i + 1], 3.3);
    EXPECT_LE(err[i] / err[i + 1], 4.7);
  }
}

TEST(SpectrumProperty, CountingMonotoneAndDensityNonnegative) {
  const auto s = disk_spectrum(1, 2000);
  std::size_t prev = 0;
  for (double e = 0; e <= 1990; e += 7.3) {
    const auto n = counting_function(s, e);
    EXPECT_GE(n, prev);
    prev = n;
    EXPECT_GE(density_of_states(s, e, 10), 0.0);
  }
}

TEST(SpectrumProperty, ScalingCovariance) {
  for (double c : {0.5, 1.7, 3.0}) {
    const auto s = disk_spectrum(1, 400), t = disk_spectrum(c, 400 / (c * c));
    ASSERT_EQ(s.size(), t.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(t[i] * c * c / s[i], 1.0, 1e-12);
    const auto r = rectangle_spectrum(1, 2, 400), q = rectangle_spectrum(c, 2 * c, 400 / (c * c));
    ASSERT_EQ(r.size(), q.size());
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(q[i] * c * c / r[i], 1.0, 1e-12);
  }
  const auto f1 = fd_dirichlet_spectrum(DomainMask::square(1.0, 64), 3);
  const auto f2 = fd_dirichlet_spectrum(DomainMask::square(2.0, 64), 3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f2[i] * 4 / f1[i], 1.0, 1e-9);
}

TEST(SpectrumProperty, SortedPositiveAndComplete) {
  for (const auto& s : {rectangle_spectrum(1, 1.5, 3000), disk_spectrum(1.2, 3000)}) {
    const auto ev = s.eigenvalues();
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
    EXPECT_GT(ev.front(), 0.0);
    EXPECT_LE(ev.back(), s.complete_up_to());
  }
}
