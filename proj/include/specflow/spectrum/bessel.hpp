#pragma once

// Bessel functions of the first kind of integer order and their positive
// zeros. Values come from Miller's backward recurrence normalized with
// J_0 + 2 sum J_2k = 1; zeros are bracketed by a sign scan and polished by
// safeguarded Newton started from McMahon's expansion.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "specflow/core/error.hpp"

namespace specflow::spectral {

/// J_{m-1}(x), J_m(x), J_{m+1}(x) for one order m at one argument.
struct BesselTriple {
  double prev = 0.0;
  double value = 0.0;
  double next = 0.0;
};

inline BesselTriple bessel_j_triple(int m, double x) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "negative Bessel order");
  if (x == 0.0) {
    BesselTriple t;
    t.value = (m == 0) ? 1.0 : 0.0;
    t.prev = (m == 1) ? 1.0 : 0.0;
    return t;
  }
  const double ax = std::abs(x);
  const double big = std::max(static_cast<double>(m + 1), ax);
  int start = static_cast<int>(big + 20.0 + std::sqrt(60.0 * big));
  start += start % 2;  // even start keeps the normalization sum aligned

  constexpr double kRescaleAbove = 1e250;
  constexpr double kRescaleBy = 1e-250;
  double jp1 = 0.0;
  double j = 1e-30;
  double sum = 0.0;
  BesselTriple out;
  const int want_prev = m - 1;
  for (int k = start; k >= 1; --k) {
    const double jm1 = 2.0 * k / ax * j - jp1;
    jp1 = j;
    j = jm1;  // j now holds J_{k-1}
    if ((k - 1) % 2 == 0 && k - 1 > 0) sum += 2.0 * j;
    if (k - 1 == m + 1) out.next = j;
    if (k - 1 == m) out.value = j;
    if (k - 1 == want_prev) out.prev = j;
    if (std::abs(j) > kRescaleAbove) {
      j *= kRescaleBy;
      jp1 *= kRescaleBy;
      sum *= kRescaleBy;
      out.value *= kRescaleBy;
      out.prev *= kRescaleBy;
      out.next *= kRescaleBy;
    }
  }
  sum += j;  // J_0
  const double norm = 1.0 / sum;
  out.value *= norm;
  out.prev *= norm;
  out.next *= norm;
  if (m == 0) out.prev = -out.next;  // J_{-1} = -J_1
  if (x < 0.0) {
    if (m % 2 != 0) out.value = -out.value;
    if ((m - 1) % 2 != 0) out.prev = -out.prev;
    if ((m + 1) % 2 != 0) out.next = -out.next;
  }
  return out;
}

inline double bessel_j(int m, double x) { return bessel_j_triple(m, x).value; }

inline double bessel_j_derivative(int m, double x) {
  const BesselTriple t = bessel_j_triple(m, x);
  return 0.5 * (t.prev - t.next);
}

struct BesselZeroLimits {
  int max_order = 400;
  int max_index = 100000;
};

namespace detail {

inline double mcmahon_guess(int m, int k) {
  const double beta = (k + 0.5 * m - 0.25) * std::numbers::pi;
  const double mu = 4.0 * m * m;
  const double b8 = 8.0 * beta;
  return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);
}

// Zero of J_m inside [lo, hi] where J_m changes sign.
inline double polish_zero(int m, double lo, double hi, double guess) {
  double flo = bessel_j(m, lo);
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const BesselTriple t = bessel_j_triple(m, x);
    const double f = t.value;
    if (f == 0.0) return x;
    if ((f > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = f;
    } else {
      hi = x;
    }
    const double df = 0.5 * (t.prev - t.next);
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x || hi - lo <= 4e-16 * x) return next;
    x = next;
  }
  throw Error(ErrorCode::NoConvergence, "Bessel zero refinement for order " + std::to_string(m));
}

}  // namespace detail

/// All positive zeros of J_m below x_max, ascending.
inline std::vector<double> bessel_zeros_below(int m, double x_max) {
  std::vector<double> zeros;
  // j_{m,1} > m, and consecutive zeros are more than 2 apart, so a unit
  // scan step cannot skip a sign change.
  double lo = std::max(0.5, static_cast<double>(m));
  double flo = bessel_j(m, lo);
  while (lo < x_max) {
    const double hi = std::min(lo + 1.0, x_max);
    const double fhi = bessel_j(m, hi);
    if (flo == 0.0) {
      zeros.push_back(lo);
    } else if ((flo > 0.0) != (fhi > 0.0) && fhi != 0.0) {
      const int k = static_cast<int>(zeros.size()) + 1;
      zeros.push_back(detail::polish_zero(m, lo, hi, detail::mcmahon_guess(m, k)));
    }
    lo = hi;
    flo = fhi;
  }
  if (!zeros.empty() && zeros.back() >= x_max) zeros.pop_back();
  return zeros;
}

/// k-th positive zero j_{m,k} (k >= 1).
inline double bessel_j_zero(int m, int k, const BesselZeroLimits& limits = {}) {
  if (m < 0 || k < 1) throw Error(ErrorCode::InvalidArgument, "Bessel zero needs m >= 0, k >= 1");
  if (m > limits.max_order || k > limits.max_index)
    throw Error(ErrorCode::InvalidArgument, "Bessel zero request beyond configured limits");
  double lo = std::max(0.5, static_cast<double>(m));
  double flo = bessel_j(m, lo);
  int found = 0;
  for (int guard = 0; guard < 4 * (k + m) + 100; ++guard) {
    const double hi = lo + 1.0;
    const double fhi = bessel_j(m, hi);
    if ((flo > 0.0) != (fhi > 0.0)) {
      if (++found == k) return detail::polish_zero(m, lo, hi, detail::mcmahon_guess(m, k));
    }
    lo = hi;
    flo = fhi;
  }
  throw Error(ErrorCode::NoConvergence, "Bessel zero scan exhausted");
}

}  // namespace specflow::spectral
