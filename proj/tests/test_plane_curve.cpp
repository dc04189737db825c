#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "specflow/plane_curve.hpp"

using namespace specflow;
using namespace specflow::curve;

namespace {

constexpr double pi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(PlaneCurve, CircleSamplesMakeValidCurve) {
  const auto c = make_closed_curve(circle_points(64, 1.0));
  EXPECT_EQ(c.size(), 64u);
  EXPECT_GT(enclosed_area(c), 0.0);
}

TEST(PlaneCurve, FourCornersAreTooFew) {
  EXPECT_EQ(code_of([] { make_closed_curve({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }), ErrorCode::TooFewPoints);
}

TEST(PlaneCurve, FigureEightIsRejected) {
  std::vector<Vec2> p;
  for (int i = 0; i < 64; ++i) {
    const double t = 2 * pi * i / 64;
    p.push_back({std::sin(t), std::sin(t) * std::cos(t)});
  }
  EXPECT_EQ(code_of([&] { make_closed_curve(p); }), ErrorCode::SelfIntersecting);
}

TEST(PlaneCurve, RepeatedVertexIsDegenerate) {
  auto p = circle_points(16, 1.0);
  p[3] = p[2];
  EXPECT_EQ(code_of([&] { make_closed_curve(p); }), ErrorCode::DegenerateSegment);
}

TEST(PlaneCurve, ClockwiseInputIsReoriented) {
  auto p = circle_points(32, 1.0);
  std::reverse(p.begin(), p.end());
  EXPECT_GT(enclosed_area(make_closed_curve(p)), 0.0);
}

TEST(PlaneCurve, LengthOfCircleAndSquare) {
  EXPECT_NEAR(length(make_closed_curve(circle_points(1000, 1.0))), 2 * pi, 1e-4);
  EXPECT_NEAR(length(make_closed_curve(square_points(50))), 4.0, 1e-12);
}

TEST(PlaneCurve, EllipseLengthMatchesQuadrature) {
  const double exact = oracle::ellipse_perimeter(2.0, 1.0);
  EXPECT_NEAR(exact, 9.6884, 1e-4);
  EXPECT_NEAR(length(make_closed_curve(ellipse_points(2000, 2.0, 1.0))), exact, 1e-3);
}

TEST(PlaneCurve, EnclosedAreas) {
  EXPECT_NEAR(enclosed_area(make_closed_curve(circle_points(1000, 1.0))), pi, 1e-4);
  EXPECT_NEAR(enclosed_area(make_closed_curve(ellipse_points(1000, 2.0, 1.0))), 2 * pi, 1e-3);
  EXPECT_DOUBLE_EQ(enclosed_area(make_closed_curve(square_points(10))), 1.0);
}

TEST(PlaneCurve, CurvatureOfCircleIsReciprocalRadius) {
  for (const auto& g : curvature_and_normal(make_closed_curve(circle_points(200, 2.0)))) EXPECT_NEAR(g.kappa, 0.5, 1e-3);
}

TEST(PlaneCurve, StraightEdgeHasZeroCurvature) {
  const auto g = curvature_and_normal(make_closed_curve(square_points(10)));
  EXPECT_NEAR(g[5].kappa, 0.0, 1e-12);
}

TEST(PlaneCurve, EllipseCurvatureMatchesAnalytic) {
  const std::size_t n = 1024;
  const auto g = curvature_and_normal(make_closed_curve(ellipse_points(n, 2.0, 1.0)));
  EXPECT_NEAR(g[0].kappa, oracle::ellipse_curvature(2, 1, 0.0), 1e-2);
  EXPECT_NEAR(g[0].kappa, 2.0, 1e-2);
  EXPECT_NEAR(g[n / 4].kappa, oracle::ellipse_curvature(2, 1, pi / 2), 1e-3);
}

TEST(PlaneCurve, NormalsPointOutward) {
  const auto c = make_closed_curve(circle_points(64, 1.0));
  const auto g = curvature_and_normal(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(norm(g[i].normal), 1.0, 1e-12);
    EXPECT_GT(dot(g[i].normal, c[i]), 0.99);
  }
}

TEST(PlaneCurve, ResamplePreservesLengthAndArea) {
  // The inscribed 100-gon and 200-gon differ by 1.2e-4 in length, so the
  // resampled curve is compared with a direct 200-point sample.
  const auto circle = make_closed_curve(circle_points(100, 1.0));
  const auto finer = resample_arclength(circle, 200);
  EXPECT_EQ(finer.size(), 200u);
  const double direct = length(make_closed_curve(circle_points(200, 1.0)));
  EXPECT_LT(std::abs(length(finer) - direct) / direct, 1e-5);
  const auto ellipse = make_closed_curve(ellipse_points(500, 2.0, 1.0));
  const auto same = resample_arclength(ellipse, 500);
  EXPECT_LT(std::abs(enclosed_area(same) - enclosed_area(ellipse)) / enclosed_area(ellipse), 1e-5);
}

TEST(PlaneCurve, ResampleRejectsTooFew) {
  const auto c = make_closed_curve(circle_points(32, 1.0));
  EXPECT_EQ(code_of([&] { resample_arclength(c, 4); }), ErrorCode::TooFewPoints);
}

TEST(PlaneCurve, IsoperimetricRatios) {
  EXPECT_NEAR(isoperimetric_ratio(make_closed_curve(circle_points(2000, 1.0))), 1.0, 1e-4);
  EXPECT_NEAR(isoperimetric_ratio(make_closed_curve(square_points(10))), 4.0 / pi, 1e-12);
  const double l = oracle::ellipse_perimeter(2, 1);
  EXPECT_NEAR(isoperimetric_ratio(make_closed_curve(ellipse_points(2000, 2.0, 1.0))), l * l / (8 * pi * pi), 1e-3);
  EXPECT_NEAR(isoperimetric_ratio(make_closed_curve(ellipse_points(2000, 2.0, 1.0))), 1.1879, 1e-3);
}

// Properties.

TEST(PlaneCurveProperty, RefinementConvergesAtSecondOrder) {
  const double l = oracle::ellipse_perimeter(2, 1);
  for (std::size_t n : {64u, 128u, 256u}) {
    const auto coarse = make_closed_curve(ellipse_points(n, 2.0, 1.0));
    const auto fine = make_closed_curve(ellipse_points(2 * n, 2.0, 1.0));
    EXPECT_GE(std::abs(length(coarse) - l) / std::abs(length(fine) - l), 3.5) << n;
    EXPECT_GE(std::abs(enclosed_area(coarse) - 2 * pi) / std::abs(enclosed_area(fine) - 2 * pi), 3.5) << n;
  }
}

TEST(PlaneCurveProperty, IsoperimetricInequalityAndTurningOnRandomStarShapes) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> amp(-0.25, 0.25);
  const auto star = [](double a2, double a3, double a5, int n) {
    std::vector<Vec2> p;
    for (int i = 0; i < n; ++i) {
      const double t = 2 * pi * i / n;
      const double r = 1 + a2 * std::cos(2 * t) + a3 * std::sin(3 * t) + a5 * std::cos(5 * t + 1);
      p.push_back({r * std::cos(t), r * std::sin(t)});
    }
    return make_closed_curve(p);
  };
  for (int trial = 0; trial < 40; ++trial) {
    const double a2 = amp(gen), a3 = amp(gen), a5 = amp(gen);
    const auto coarse = star(a2, a3, a5, 512);
    const auto fine = star(a2, a3, a5, 1024);
    EXPECT_GE(isoperimetric_ratio(coarse), 1.0 - 1e-6);
    // Peak curvature reaches about 24 on these shapes; the turning error is O(h^2).
    EXPECT_NEAR(total_turning(fine), 2 * pi, 1e-3);
    EXPECT_GE(std::abs(total_turning(coarse) - 2 * pi) / std::abs(total_turning(fine) - 2 * pi), 3.5);
  }
}

TEST(PlaneCurveProperty, CircleCurvatureErrorIsSecondOrder) {
  // Uneven spacing: Menger curvature stays exact on any circle.
  std::vector<Vec2> p;
  for (int i = 0; i < 40; ++i) {
    const double t = 2 * pi * (i + 0.3 * std::sin(i)) / 40;
    p.push_back({3 * std::cos(t), 3 * std::sin(t)});
  }
  for (const auto& g : curvature_and_normal(make_closed_curve(p))) EXPECT_NEAR(g.kappa, 1.0 / 3.0, 1e-12);
}
