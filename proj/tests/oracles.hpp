#pragma once

// Independent reference computations for the test suite. Nothing here
// calls into the library.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Adaptive Simpson quadrature with Richardson correction.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
  const auto rule = [&](double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  };
  const std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = rule(lo, mid, flo, flm, fmid), right = rule(mid, hi, fmid, frm, fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) + rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, rule(a, b, fa, fm, fb), tol, depth);
}

/// Perimeter of the ellipse x = a cos t, y = b sin t.
inline double ellipse_perimeter(double a, double b) {
  return simpson([&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); }, 0.0, 2.0 * std::numbers::pi,
                 1e-12);
}

/// Curvature of the same ellipse at parameter t.
inline double ellipse_curvature(double a, double b, double t) {
  const double c = std::cos(t), s = std::sin(t);
  return a * b / std::pow(b * b * c * c + a * a * s * s, 1.5);
}

/// J_m by its power series in extended precision; cancellation limits it
/// to x below about 20.
inline double bessel_series(int m, double xd) {
  const long double x = xd;
  long double term = 1.0L;
  for (int k = 1; k <= m; ++k) term *= 0.5L * x / k;
  long double sum = term;
  for (int k = 1; k < 300; ++k) {
    term *= -(0.25L * x * x) / (static_cast<long double>(k) * (k + m));
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  return static_cast<double>(sum);
}

/// k-th positive zero of J_m by scanning and bisection on the series.
inline double bessel_zero(int m, int k) {
  double lo = 0.1 + m, flo = bessel_series(m, lo);
  int found = 0;
  for (double x = lo + 0.05;; x += 0.05) {
    const double fx = bessel_series(m, x);
    if ((flo < 0) != (fx < 0)) {
      if (++found == k) {
        double a = x - 0.05, b = x, fa = flo;
        for (int it = 0; it < 200; ++it) {
          const double c = 0.5 * (a + b), fc = bessel_series(m, c);
          if ((fa < 0) == (fc < 0)) a = c, fa = fc;
          else b = c;
        }
        return 0.5 * (a + b);
      }
    }
    lo = x;
    flo = fx;
  }
}

/// Rectangle Dirichlet eigenvalues pi^2 (j^2/a^2 + k^2/b^2) up to `cutoff`, by brute enumeration.
inline std::vector<double> rectangle_levels(double a, double b, double cutoff) {
  std::vector<double> out;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int j = 1; pi2 * j * j / (a * a) <= cutoff; ++j)
    for (int k = 1;; ++k) {
      const double e = pi2 * (double(j * j) / (a * a) + double(k * k) / (b * b));
      if (e > cutoff) break;
      out.push_back(e);
    }
  return out;
}

/// Least-squares slope of y on x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

}  // namespace oracle
