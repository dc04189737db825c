#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "specflow/asymptotics.hpp"

using namespace specflow;
using namespace specflow::asym;

namespace {

constexpr double pi = std::numbers::pi;

/// Unit-square heat trace from the separable theta sum (sum_m e^{-pi^2 m^2 / T})^2.
double square_theta(double t) {
  double s = 0;
  for (int m = 1; m < 10000; ++m) {
    const double term = std::exp(-pi * pi * m * m / t);
    s += term;
    if (term < 1e-300) break;
  }
  return s * s;
}

}  // namespace

TEST(WeylTwoTerm, UnitSquareAndDisk) {
  EXPECT_NEAR(weyl_two_term({2, 1.0, 4.0}, 100), 100 / (4 * pi) - 40 / (4 * pi), 1e-12);
  EXPECT_NEAR(weyl_two_term({2, 1.0, 4.0}, 100), 4.7746, 1e-4);
  const WeylModel disk{2, pi, 2 * pi};
  EXPECT_NEAR(disk.c0(), 0.25, 1e-15);
  EXPECT_NEAR(disk.c1(), 0.5, 1e-15);
  EXPECT_NEAR(weyl_two_term(disk, 100), 20.0, 1e-12);
}

TEST(WeylTwoTerm, LeadingRatioTendsToAreaOver4Pi) {
  const WeylModel m{2, 1.0, 4.0};
  EXPECT_NEAR(weyl_two_term(m, 1e12) / 1e12, 1 / (4 * pi), 1e-6);
}

TEST(WeylFit, UnitSquareRecoversGeometry) {
  const auto s = spectral::rectangle_spectrum(1, 1, 1e5);
  const auto fit = weyl_fit(s, 1e4, 1e5);
  EXPECT_NEAR(fit.vol_est, 1.0, 0.05);
  EXPECT_NEAR(fit.bvol_est, 4.0, 0.4);
}

TEST(WeylFit, UnitDiskRecoversGeometry) {
  const auto s = spectral::disk_spectrum(1, 4e4);
  const auto fit = weyl_fit(s, 4e3, 4e4);
  EXPECT_NEAR(fit.vol_est / pi, 1.0, 0.05);
  EXPECT_NEAR(fit.bvol_est / (2 * pi), 1.0, 0.1);
}

TEST(WeylFit, NarrowWindowIsTooSmall) {
  const auto s = spectral::rectangle_spectrum(1, 1, 2000);
  try {
    weyl_fit(s, 1000, 1100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowTooSmall);
  }
}

TEST(HeatTraceModel, FlatTorusIsLinear) {
  const auto m = flat_torus_model(7.0);
  for (double t : {0.5, 3.0, 80.0}) EXPECT_NEAR(heat_trace_model(m, t), t * 7.0 / (4 * pi), 1e-12);
}

TEST(HeatTraceModel, UnitDiskConstantsBySet) {
  const auto boundary_h = flat_domain_model(pi, 2 * pi, 1, CoefficientSet::boundary_h);
  const auto classical = flat_domain_model(pi, 2 * pi, 1, CoefficientSet::classical);
  const double lead = 25.0 - 2 * pi * 10 / (8 * std::sqrt(pi));
  EXPECT_NEAR(heat_trace_model(boundary_h, 100) - lead, -1.0 / 12, 1e-12);
  EXPECT_NEAR(heat_trace_model(classical, 100) - lead, 1.0 / 6, 1e-12);
}

TEST(HeatTraceModel, RoundSphere) {
  HeatTraceModel m;
  m.vol = 4 * pi;
  m.integral_scalar = 8 * pi;
  m.integral_quadratic = 48 * pi;
  for (double t : {2.0, 10.0}) EXPECT_NEAR(heat_trace_model(m, t), t + 1.0 / 3 + 1 / (15 * t), 1e-12);
}

TEST(PartitionFunction, SmallTemperatureVanishes) {
  const auto s = spectral::rectangle_spectrum(1, 1, 1000);
  EXPECT_NEAR(partition_function_from_spectrum(s, 0.5).value, std::exp(-2 * pi * pi / 0.5) * 1.0000001, 1e-17);
}

TEST(PartitionFunction, UnitSquareMatchesCornerLaw) {
  const auto s = spectral::rectangle_spectrum(1, 1, 1e5);
  const double t = 50;
  const auto z = partition_function_from_spectrum(s, t);
  EXPECT_NEAR(z.value / square_theta(t), 1.0, 1e-10);
  const double model = t / (4 * pi) - 4 * std::sqrt(t) / (8 * std::sqrt(pi)) + 0.25;
  EXPECT_NEAR(z.value / model, 1.0, 5e-3);
}

TEST(PartitionFunction, TailDominatesAtHighTemperature) {
  const auto s = spectral::rectangle_spectrum(1, 1, 100);
  try {
    partition_function_from_spectrum(s, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TailDominates);
  }
}

TEST(ConstantExtract, UnitDiskIsOneSixth) {
  const auto s = spectral::disk_spectrum(1, 4e4);
  const std::vector<double> temps = {10, 15, 20, 25, 30, 35, 40, 45, 50};
  const auto fit = heat_trace_constant_extract(s, temps, std::make_pair(pi, 2 * pi));
  EXPECT_NEAR(fit.const_term, 1.0 / 6, 1.0 / 30);
  EXPECT_GT(std::abs(fit.const_term + 1.0 / 12), 0.2);
}

TEST(ConstantExtract, UnitSquareIsOneQuarter) {
  const auto s = spectral::rectangle_spectrum(1, 1, 4e4);
  const std::vector<double> temps = {10, 20, 30, 40, 50};
  EXPECT_NEAR(heat_trace_constant_extract(s, temps, std::make_pair(1.0, 4.0)).const_term, 0.25, 0.05);
  EXPECT_NEAR(heat_trace_constant_extract(s, temps).const_term, 0.25, 0.05);
}

TEST(ConstantExtract, FlatTorusHasNoConstant) {
  const double side = 2 * pi;
  const auto s = spectral::torus_spectrum(side, side, 4e3);
  const std::vector<double> temps = {10, 20, 30, 40, 50};
  EXPECT_NEAR(heat_trace_constant_extract(s, temps, std::make_pair(side * side, 0.0)).const_term, 0.0, 1e-9);
}

// Properties.

TEST(AsymptoticsProperty, WeylMonotoneAboveValidityThreshold) {
  const WeylModel m{2, 1.0, 4.0};
  const double start = std::pow(m.c1() / (2 * m.c0()), 2);
  double prev = weyl_two_term(m, start);
  for (double e = start * 1.01; e < 1e6; e *= 1.3) {
    const double n = weyl_two_term(m, e);
    EXPECT_GT(n, prev);
    prev = n;
  }
}

TEST(AsymptoticsProperty, FitResidualFallsAtHigherWindows) {
  const auto s = spectral::rectangle_spectrum(1, 1.3, 2e5);
  const double low = weyl_fit(s, 1e3, 1e4).residual;
  const double high = weyl_fit(s, 1e5, 2e5).residual;
  EXPECT_GT(low, 0.0);
  // Residuals are lattice fluctuations; relative to N they fall with E.
  EXPECT_LT(high / weyl_two_term({2, 1.3, 4.6}, 2e5), low / weyl_two_term({2, 1.3, 4.6}, 1e4));
}

TEST(AsymptoticsProperty, PartitionFunctionIncreasesInTemperature) {
  const auto s = spectral::disk_spectrum(1, 4e4);
  double prev = 0;
  for (double t = 0.5; t <= 50; t *= 1.25) {
    const double z = partition_function_from_spectrum(s, t).value;
    EXPECT_GT(z, prev);
    prev = z;
  }
}

TEST(AsymptoticsProperty, DiskMatchesClassicalModelWithinOnePercent) {
  const auto s = spectral::disk_spectrum(1, 4e4);
  const auto m = flat_domain_model(pi, 2 * pi, 1, CoefficientSet::classical);
  for (double t = 10; t <= 50; t += 5) {
    const double z = partition_function_from_spectrum(s, t).value;
    EXPECT_LT(std::abs(z - heat_trace_model(m, t)) / z, 1e-2) << t;
  }
}

TEST(AsymptoticsProperty, FitRecoversVolumeOnRandomRectangles) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> side(0.5, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = side(gen), b = side(gen);
    const auto fit = weyl_fit(spectral::rectangle_spectrum(a, b, 1e5), 1e4, 1e5);
    EXPECT_NEAR(fit.vol_est / (a * b), 1.0, 0.05);
  }
}
