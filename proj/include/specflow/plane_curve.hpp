#pragma once

// Discrete closed plane curves: construction checks, length, enclosed area,
// vertex curvature and normals, arclength resampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/core/error.hpp"
#include "specflow/core/spline.hpp"
#include "specflow/core/vec2.hpp"

namespace specflow::curve {

inline constexpr std::size_t kMinVertices = 8;

/// Shoelace signed area; positive for counter-clockwise vertex order.
inline double signed_area(std::span<const Vec2> p) {
  const std::size_t n = p.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(p[i], p[(i + 1) % n]);
  return 0.5 * twice;
}

inline double polygon_length(std::span<const Vec2> p) {
  const std::size_t n = p.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += norm(p[(i + 1) % n] - p[i]);
  return sum;
}

inline double min_segment_length(std::span<const Vec2> p) {
  const std::size_t n = p.size();
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) h = std::min(h, norm(p[(i + 1) % n] - p[i]));
  return h;
}

namespace detail {

inline int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  const double scale = 1e-14 * (norm(b - a) * norm(c - a) + 1e-300);
  if (v > scale) return 1;
  if (v < -scale) return -1;
  return 0;
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  if (std::max(p1.x, p2.x) < std::min(q1.x, q2.x) || std::max(q1.x, q2.x) < std::min(p1.x, p2.x) ||
      std::max(p1.y, p2.y) < std::min(q1.y, q2.y) || std::max(q1.y, q2.y) < std::min(p1.y, p2.y))
    return false;
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace detail

/// Brute-force O(n^2) test over non-adjacent edge pairs, early exit.
inline bool is_simple(std::span<const Vec2> p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // shares vertex 0
      if (detail::segments_intersect(a, b, p[j], p[(j + 1) % n])) return false;
    }
  }
  return true;
}

/// Immutable closed polygon: at least 8 vertices, simple, counter-clockwise.
class PlaneCurve {
 public:
  std::span<const Vec2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec2& operator[](std::size_t i) const { return vertices_[i]; }

 private:
  explicit PlaneCurve(std::vector<Vec2> v) : vertices_(std::move(v)) {}
  friend PlaneCurve make_closed_curve(std::vector<Vec2> points);
  friend PlaneCurve make_closed_curve_unchecked(std::vector<Vec2> points);

  std::vector<Vec2> vertices_;
};

inline PlaneCurve make_closed_curve(std::vector<Vec2> points) {
  if (points.size() < kMinVertices)
    throw Error(ErrorCode::TooFewPoints,
                "closed curve needs at least 8 vertices, got " + std::to_string(points.size()));
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(norm(points[(i + 1) % n] - points[i]) > 0.0))
      throw Error(ErrorCode::DegenerateSegment, "zero-length segment at vertex " + std::to_string(i));
  }
  if (!is_simple(points)) throw Error(ErrorCode::SelfIntersecting, "curve crosses itself");
  if (signed_area(points) < 0.0) std::reverse(points.begin() + 1, points.end());
  return PlaneCurve(std::move(points));
}

// Skips the O(n^2) simplicity test; for callers that checked already or
// that re-check on their own schedule (flows).
inline PlaneCurve make_closed_curve_unchecked(std::vector<Vec2> points) {
  if (points.size() < kMinVertices) throw Error(ErrorCode::TooFewPoints, "closed curve needs >= 8 vertices");
  if (signed_area(points) < 0.0) std::reverse(points.begin() + 1, points.end());
  return PlaneCurve(std::move(points));
}

inline double length(const PlaneCurve& c) { return polygon_length(c.vertices()); }
inline double enclosed_area(const PlaneCurve& c) { return signed_area(c.vertices()); }

inline double isoperimetric_ratio(const PlaneCurve& c) {
  const double L = length(c);
  return L * L / (4.0 * std::numbers::pi * enclosed_area(c));
}

/// Per-vertex discrete geometry. `weight` is half the chord through the two
/// neighbours, the dual length for which sum(weight * kappa) is the total
/// turning and d(area)/d(vertex) = weight * normal.
struct VertexGeometry {
  double kappa = 0.0;
  Vec2 normal;
  double weight = 0.0;
};

/// Signed circumscribed-circle (Menger) curvature; collinear triples give 0.
inline double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double denom = norm(b - a) * norm(c - b) * norm(c - a);
  if (!(denom > 0.0)) return 0.0;
  return 2.0 * cross(b - a, c - b) / denom;
}

inline std::vector<VertexGeometry> vertex_geometry(std::span<const Vec2> p) {
  const std::size_t n = p.size();
  std::vector<VertexGeometry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = p[(i + n - 1) % n];
    const Vec2& b = p[i];
    const Vec2& c = p[(i + 1) % n];
    const Vec2 chord = c - a;
    const double chord_len = norm(chord);
    out[i].kappa = menger_curvature(a, b, c);
    out[i].normal = rotate_cw(chord) * (1.0 / chord_len);
    out[i].weight = 0.5 * chord_len;
  }
  return out;
}

inline std::vector<VertexGeometry> curvature_and_normal(const PlaneCurve& c) {
  return vertex_geometry(c.vertices());
}

/// Total turning sum(kappa_i * weight_i); 2*pi for a simple smooth curve.
inline double total_turning(const PlaneCurve& c) {
  double sum = 0.0;
  for (const auto& g : curvature_and_normal(c)) sum += g.kappa * g.weight;
  return sum;
}

/// m vertices equally spaced in arclength along the periodic cubic spline
/// through the current vertices. Vertex 0 is kept fixed.
inline std::vector<Vec2> resample_points(std::span<const Vec2> p, std::size_t m) {
  if (m < kMinVertices) throw Error(ErrorCode::TooFewPoints, "resample count must be >= 8");
  return ClosedSpline2D(p).resample_uniform(m);
}

inline PlaneCurve resample_arclength(const PlaneCurve& c, std::size_t m) {
  return make_closed_curve_unchecked(resample_points(c.vertices(), m));
}

// Sample generators used by tests, the CLI and the flows.

inline std::vector<Vec2> ellipse_points(std::size_t n, double a, double b, Vec2 center = {}) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts[i] = center + Vec2{a * std::cos(t), b * std::sin(t)};
  }
  return pts;
}

inline std::vector<Vec2> circle_points(std::size_t n, double r, Vec2 center = {}) {
  return ellipse_points(n, r, r, center);
}

/// Axis-aligned square boundary with `per_side` vertices along each side.
inline std::vector<Vec2> square_points(std::size_t per_side, double side = 1.0) {
  std::vector<Vec2> pts;
  const double step = side / static_cast<double>(per_side);
  for (std::size_t i = 0; i < per_side; ++i) pts.push_back({step * static_cast<double>(i), 0.0});
  for (std::size_t i = 0; i < per_side; ++i) pts.push_back({side, step * static_cast<double>(i)});
  for (std::size_t i = 0; i < per_side; ++i) pts.push_back({side - step * static_cast<double>(i), side});
  for (std::size_t i = 0; i < per_side; ++i) pts.push_back({0.0, side - step * static_cast<double>(i)});
  return pts;
}

// Curve CSV: one "x,y" row per vertex. A non-numeric first row is skipped.
inline std::vector<Vec2> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open curve file " + path);
  std::vector<Vec2> pts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Vec2 p;
    if (!(row >> p.x >> p.y)) {
      if (first) { first = false; continue; }
      throw Error(ErrorCode::Io, "malformed curve row: " + line);
    }
    first = false;
    pts.push_back(p);
  }
  return pts;
}

inline PlaneCurve load_curve_csv(const std::string& path) { return make_closed_curve(read_curve_csv(path)); }

}  // namespace specflow::curve
