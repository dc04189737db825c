#include <gtest/gtest.h>

#include <numbers>

#include "specflow/ensembles.hpp"
#include "specflow/surface_flow.hpp"

using namespace specflow;
using namespace specflow::ens;

namespace {

constexpr double pi = std::numbers::pi;

/// Two-level partition function written out by hand.
struct TwoLevel {
  double a, b;
  double log_z(double t) const { return std::log(std::exp(-a / t) + std::exp(-b / t)); }
};

}  // namespace

TEST(Microcanonical, WeylModelSurfaceEntropy) {
  const asym::WeylModel m{2, 1.0, 4.0};
  const auto e = microcanonical_entropy(m, 1e4);
  EXPECT_NEAR(e.surface, std::log(1 / (4 * pi)), 1e-12);
  EXPECT_NEAR(e.surface, -2.5310, 1e-4);
  EXPECT_NEAR(microcanonical_entropy(m, 1e4, 10).boltzmann, e.surface + std::log(10.0), 1e-12);
}

TEST(Microcanonical, EmptyWindowBelowGroundState) {
  const auto s = spectral::rectangle_spectrum(1, 1, 500);
  try {
    microcanonical_entropy(s, 1, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyWindow);
  }
}

TEST(SurfaceEntropy, UnitDiskSubstitution) {
  EXPECT_NEAR(surface_entropy_expansion(2, 100, pi, 2 * pi), std::log(0.25) - pi / 2 * 0.1 * 2, 1e-12);
  EXPECT_NEAR(surface_entropy_expansion(2, 100, pi, 2 * pi), -1.7005, 1e-4);
}

TEST(SurfaceEntropy, DecreasesWithBoundaryAtFixedArea) {
  const double a = 2.0, e = 1e4;
  double prev = surface_entropy_expansion(2, e, a, 5.0);
  for (double l = 5.5; l < 20; l += 0.5) {
    const double s = surface_entropy_expansion(2, e, a, l);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(SurfaceEntropy, CircleBeatsSquareOfEqualArea) {
  const double circle_perimeter = 2 * std::sqrt(pi);  // area 1
  EXPECT_GT(surface_entropy_expansion(2, 1e4, 1, circle_perimeter), surface_entropy_expansion(2, 1e4, 1, 4));
}

TEST(GibbsEntropy, FlatTorusModel) {
  const HeatTracePartition torus{asym::flat_torus_model(5.0)};
  for (double t : {1.0, 10.0, 300.0}) {
    EXPECT_NEAR(gibbs_entropy(torus, t), std::log(t * 5 / (4 * pi)) + 1, 1e-12);
    EXPECT_NEAR(internal_energy(torus, t), t, 1e-12 * t);
  }
}

TEST(GibbsEntropy, SingleLevelLimit) {
  const auto s = spectral::Spectrum::make({1.0}, 1.0, spectral::SpectrumSource::explicit_list);
  const SpectrumPartition src{&s};
  // One level: ln Z = -g/T, so S = 0 and U = g exactly at every T.
  for (double t : {0.1, 10.0, 1e6}) {
    const auto st = thermo_state(src, t);
    EXPECT_NEAR(st.entropy, 0.0, 1e-8);
    EXPECT_NEAR(st.energy, 1.0, 1e-8);
  }
}

TEST(GibbsEntropy, DualPathOnTorusModel) {
  const HeatTracePartition torus{asym::flat_torus_model(4 * pi * pi)};
  for (double t : {0.3, 2.0, 50.0, 1e3}) {
    const double a = gibbs_entropy(torus, t, {Differentiation::analytic});
    const double f = gibbs_entropy(torus, t, {Differentiation::finite_difference});
    EXPECT_NEAR(f / a, 1.0, 1e-8) << t;
  }
}

TEST(GibbsEntropy, TwoLevelClosedForm) {
  const TwoLevel src{1.0, 3.0};
  for (double t : {0.5, 1.0, 4.0}) {
    const double za = std::exp(-1 / t), zb = std::exp(-3 / t), z = za + zb;
    const double u = (1 * za + 3 * zb) / z;
    const auto st = thermo_state(src, t);
    EXPECT_NEAR(st.energy, u, 1e-9);
    EXPECT_NEAR(st.entropy, u / t + std::log(z), 1e-9);
  }
}

TEST(GibbsEntropy, ClosedSurfaceOnFlatTorus) {
  const auto m = surface::make_torus_metric(32, 2 * pi, [](double) { return 1.0; }, [](double) { return 4.0; });
  const double vol = surface::volume(m);
  EXPECT_NEAR(vol, 2 * pi * 2 * 2 * pi, 1e-10);
  EXPECT_NEAR(gibbs_entropy_closed_d2(m, 20).entropy, std::log(20 * vol / (4 * pi)) + 1, 1e-10);
}

TEST(GibbsEntropy, ClosedSurfaceOnRoundSphere) {
  const auto m = surface::perturbed_sphere(64, 0.0);
  const auto e = gibbs_entropy_closed_d2(m, 10);
  EXPECT_NEAR(e.mean_r, 2.0, 1e-4);
  EXPECT_NEAR(e.mean_r2, 4.0, 1e-3);
  EXPECT_NEAR(e.entropy, std::log(10.0) + 1 - 4.0 / 6000 + 4.0 / 7200, 1e-4);
}

TEST(GibbsEntropy, ClosedSurfaceDecreasesWithCurvatureVariance) {
  const auto flat = surface::perturbed_torus(64, 0.02);
  const auto bumpy = surface::perturbed_torus(64, 0.1);
  const auto a = gibbs_entropy_closed_d2(flat, 5), b = gibbs_entropy_closed_d2(bumpy, 5);
  ASSERT_GT(b.mean_r2, a.mean_r2);
  // Compare at equal volume: only the curvature terms differ.
  const double ta = a.entropy - std::log(a.vol), tb = b.entropy - std::log(b.vol);
  EXPECT_LT(tb, ta);
}

TEST(EntropyRate, ConstantAndLinearTraces) {
  const std::vector<double> t = {0, 0.1, 0.3, 0.6, 1.0};
  for (double r : entropy_rate_along_flow(t, std::vector<double>(5, 2.0))) EXPECT_NEAR(r, 0.0, 1e-15);
  for (double r : entropy_rate_along_flow(t, t)) EXPECT_NEAR(r, 1.0, 1e-12);
}

// Properties.

TEST(EnsembleProperty, ThermodynamicIdentityOnAllSources) {
  const auto disk = spectral::disk_spectrum(1, 4e4);
  const auto toy = spectral::Spectrum::make({2.5}, 2.5, spectral::SpectrumSource::explicit_list);
  const SpectrumPartition a{&disk}, b{&toy};
  const HeatTracePartition c{asym::flat_domain_model(pi, 2 * pi, 1, asym::CoefficientSet::classical)};
  const HeatTracePartition d{asym::flat_torus_model(3.0)};
  const ClosedSurfaceExpansion e = closed_surface_expansion(surface::perturbed_sphere(32, 0.02));
  const TwoLevel f{0.5, 2.0};
  auto check = [](const auto& src, double t) {
    const auto st = thermo_state(src, t);
    EXPECT_NEAR(st.entropy, st.energy / t + st.log_z, 1e-8 * std::max(1.0, std::abs(st.entropy)));
  };
  for (double t : {10.0, 25.0, 50.0}) {
    check(a, t);
    check(b, t);
    check(c, t);
    check(d, t);
    check(e, t);
    check(f, t);
  }
}

TEST(EnsembleProperty, SpectrumEntropyNondecreasingInTemperature) {
  const auto s = spectral::disk_spectrum(1, 4e4);
  const SpectrumPartition src{&s};
  double prev = -1e300;
  for (double t = 0.5; t <= 50; t *= 1.2) {
    const double v = gibbs_entropy(src, t);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(EnsembleProperty, SurfaceExpansionMatchesWeylModelPath) {
  for (double e : {1e2, 1e4, 1e6})
    for (double a : {0.5, 1.0, 3.0}) {
      const asym::WeylModel m{2, a, 4.1 * a};
      const double direct = surface_entropy_expansion(2, e, a, 4.1 * a, OmegaConvention::unit_ball);
      const double model = microcanonical_entropy(m, e, 1.0, DensityOrder::log_expanded).surface;
      EXPECT_NEAR(direct, model, 1e-12);
    }
}

TEST(EnsembleProperty, DiskSpectrumMatchesClassicalModel) {
  const auto s = spectral::disk_spectrum(1, 4e4);
  const SpectrumPartition spec{&s};
  const HeatTracePartition model{asym::flat_domain_model(pi, 2 * pi, 1, asym::CoefficientSet::classical)};
  for (double t = 10; t <= 50; t += 10) EXPECT_NEAR(gibbs_entropy(spec, t) / gibbs_entropy(model, t), 1.0, 0.02);
}
