#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "specflow/core/error.hpp"
#include "specflow/core/vec2.hpp"

namespace specflow {

namespace detail {

// Plain Thomas algorithm for sub-diagonal a, diagonal b, super-diagonal c.
inline std::vector<double> thomas(const std::vector<double>& a, const std::vector<double>& b,
                                  const std::vector<double>& c, const std::vector<double>& r) {
  const std::size_t n = b.size();
  std::vector<double> cp(n), x(n);
  double denom = b[0];
  cp[0] = c[0] / denom;
  x[0] = r[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = b[i] - a[i] * cp[i - 1];
    cp[i] = c[i] / denom;
    x[i] = (r[i] - a[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  return x;
}

// Cyclic tridiagonal solve: a[0] couples row 0 to column n-1 and c[n-1]
// couples row n-1 to column 0. Sherman-Morrison on top of Thomas.
inline std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& a,
                                                    const std::vector<double>& b,
                                                    const std::vector<double>& c,
                                                    const std::vector<double>& r) {
  const std::size_t n = b.size();
  const double alpha = c[n - 1];
  const double beta = a[0];
  const double gamma = -b[0];
  std::vector<double> bmod = b;
  bmod[0] = b[0] - gamma;
  bmod[n - 1] = b[n - 1] - alpha * beta / gamma;
  std::vector<double> x = thomas(a, bmod, c, r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> z = thomas(a, bmod, c, u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace detail

/// Periodic interpolating cubic spline through the vertices of a closed
/// polygon, parametrized by cumulative chord length.
class ClosedSpline2D {
 public:
  explicit ClosedSpline2D(std::span<const Vec2> pts) : pts_(pts.begin(), pts.end()) {
    const std::size_t n = pts_.size();
    if (n < 3) throw Error(ErrorCode::TooFewPoints, "spline needs at least 3 points");
    knots_.resize(n + 1);
    knots_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double seg = norm(pts_[(i + 1) % n] - pts_[i]);
      if (!(seg > 0.0)) throw Error(ErrorCode::DegenerateSegment, "repeated vertex in spline input");
      knots_[i + 1] = knots_[i] + seg;
    }
    mx_ = second_derivatives([](const Vec2& p) { return p.x; });
    my_ = second_derivatives([](const Vec2& p) { return p.y; });

    seg_len_.resize(n);
    for (std::size_t i = 0; i < n; ++i) seg_len_[i] = arc_on_segment(i, knot_width(i));
    cum_len_.resize(n + 1);
    cum_len_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) cum_len_[i + 1] = cum_len_[i] + seg_len_[i];
  }

  std::size_t size() const { return pts_.size(); }
  double period() const { return knots_.back(); }
  double arclength() const { return cum_len_.back(); }

  Vec2 eval(std::size_t seg, double u) const {
    return {eval_component(seg, u, mx_, &Vec2::x), eval_component(seg, u, my_, &Vec2::y)};
  }
  Vec2 derivative(std::size_t seg, double u) const {
    return {deriv_component(seg, u, mx_, &Vec2::x), deriv_component(seg, u, my_, &Vec2::y)};
  }

  /// m points equally spaced in spline arclength, the first at vertex 0.
  std::vector<Vec2> resample_uniform(std::size_t m) const {
    std::vector<Vec2> out;
    out.reserve(m);
    const double total = arclength();
    std::size_t seg = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double target = total * static_cast<double>(k) / static_cast<double>(m);
      while (seg + 1 < pts_.size() && cum_len_[seg + 1] <= target) ++seg;
      out.push_back(eval(seg, invert_on_segment(seg, target - cum_len_[seg])));
    }
    return out;
  }

 private:
  template <class Get>
  std::vector<double> second_derivatives(Get get) const {
    const std::size_t n = pts_.size();
    std::vector<double> a(n), b(n), c(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n;
      const std::size_t ip = (i + 1) % n;
      const double hm = knot_width(im);
      const double hp = knot_width(i);
      a[i] = hm;
      b[i] = 2.0 * (hm + hp);
      c[i] = hp;
      r[i] = 6.0 * ((get(pts_[ip]) - get(pts_[i])) / hp - (get(pts_[i]) - get(pts_[im])) / hm);
    }
    return detail::solve_cyclic_tridiagonal(a, b, c, r);
  }

  double knot_width(std::size_t i) const { return knots_[i + 1] - knots_[i]; }

  double eval_component(std::size_t i, double u, const std::vector<double>& m,
                        double Vec2::*field) const {
    const std::size_t n = pts_.size();
    const std::size_t ip = (i + 1) % n;
    const double h = knot_width(i);
    const double y0 = pts_[i].*field;
    const double y1 = pts_[ip].*field;
    const double b = (y1 - y0) / h - h * (2.0 * m[i] + m[ip]) / 6.0;
    const double c = 0.5 * m[i];
    const double d = (m[ip] - m[i]) / (6.0 * h);
    return y0 + u * (b + u * (c + u * d));
  }

  double deriv_component(std::size_t i, double u, const std::vector<double>& m,
                         double Vec2::*field) const {
    const std::size_t n = pts_.size();
    const std::size_t ip = (i + 1) % n;
    const double h = knot_width(i);
    const double b = (pts_[ip].*field - pts_[i].*field) / h - h * (2.0 * m[i] + m[ip]) / 6.0;
    const double c = 0.5 * m[i];
    const double d = (m[ip] - m[i]) / (6.0 * h);
    return b + u * (2.0 * c + 3.0 * d * u);
  }

  double arc_on_segment(std::size_t seg, double upper) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < detail::kGaussNodes.size(); ++q) {
      const double u = 0.5 * upper * (detail::kGaussNodes[q] + 1.0);
      sum += detail::kGaussWeights[q] * norm(derivative(seg, u));
    }
    return 0.5 * upper * sum;
  }

  // Parameter u on segment seg whose arclength from the segment start is s.
  double invert_on_segment(std::size_t seg, double s) const {
    const double h = knot_width(seg);
    double lo = 0.0, hi = h;
    double u = h * s / seg_len_[seg];
    for (int it = 0; it < 50; ++it) {
      const double f = arc_on_segment(seg, u) - s;
      if (std::abs(f) < 1e-15 * (1.0 + seg_len_[seg])) break;
      if (f > 0.0) hi = u; else lo = u;
      const double speed = norm(derivative(seg, u));
      double next = u - f / speed;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      u = next;
    }
    return u;
  }

  std::vector<Vec2> pts_;
  std::vector<double> knots_;
  std::vector<double> mx_, my_;
  std::vector<double> seg_len_, cum_len_;
};

}  // namespace specflow
