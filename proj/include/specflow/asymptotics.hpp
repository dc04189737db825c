#pragma once

// Two-term Weyl counting law, small-time heat-trace models with two
// coefficient sets, and least-squares fits that read geometry off a
// spectrum.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specflow/core/error.hpp"
#include "specflow/spectrum/spectrum.hpp"

namespace specflow::asym {

/// Volume of the unit ball in k dimensions.
inline double unit_ball_volume(int k) {
  return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

/// Dirichlet counting law N(E) ~ c0 E^{d/2} - c1 E^{(d-1)/2}.
struct WeylModel {
  int dim = 2;
  double vol = 0.0;
  double bvol = 0.0;

  double c0() const { return unit_ball_volume(dim) * vol / std::pow(2.0 * std::numbers::pi, dim); }
  double c1() const {
    return unit_ball_volume(dim - 1) * bvol / (4.0 * std::pow(2.0 * std::numbers::pi, dim - 1));
  }
};

inline double weyl_two_term(const WeylModel& m, double energy) {
  if (!(energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy must be positive");
  return m.c0() * std::pow(energy, 0.5 * m.dim) - m.c1() * std::pow(energy, 0.5 * (m.dim - 1));
}

/// dN/dE of the two-term law.
inline double weyl_density(const WeylModel& m, double energy) {
  if (!(energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy must be positive");
  const double d = m.dim;
  return 0.5 * d * m.c0() * std::pow(energy, 0.5 * d - 1.0) -
         0.5 * (d - 1.0) * m.c1() * std::pow(energy, 0.5 * (d - 1.0) - 1.0);
}

struct WeylFit {
  double vol_est = 0.0;
  double bvol_est = 0.0;
  double residual = 0.0;  // RMS of N(E) minus the fitted law on the grid
  double e_min = 0.0;
  double e_max = 0.0;
  std::size_t eigenvalues_in_window = 0;
};

/// Ordinary least squares of N(E) on {E^{d/2}, E^{(d-1)/2}} over an
/// equally spaced energy grid.
inline WeylFit weyl_fit(const spectral::Spectrum& s, double e_min, double e_max, int dim = 2,
                        std::size_t grid_points = 2000) {
  if (!(e_max > e_min && e_min > 0.0)) throw Error(ErrorCode::InvalidArgument, "fit window must satisfy 0 < E_min < E_max");
  const std::size_t inside = spectral::counting_function(s, e_max) - spectral::counting_function(s, e_min);
  if (inside < 100) throw Error(ErrorCode::WindowTooSmall, "fit window holds fewer than 100 eigenvalues");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(grid_points), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(grid_points));
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double e = e_min + (e_max - e_min) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = std::pow(e, 0.5 * dim);
    design(r, 1) = -std::pow(e, 0.5 * (dim - 1));
    rhs[r] = static_cast<double>(spectral::counting_function(s, e));
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  WeylFit fit;
  const double two_pi = 2.0 * std::numbers::pi;
  fit.vol_est = coef[0] * std::pow(two_pi, dim) / unit_ball_volume(dim);
  fit.bvol_est = coef[1] * 4.0 * std::pow(two_pi, dim - 1) / unit_ball_volume(dim - 1);
  fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(grid_points));
  fit.e_min = e_min;
  fit.e_max = e_max;
  fit.eigenvalues_in_window = inside;
  return fit;
}

enum class CoefficientSet {
  boundary_h,  // boundary-curvature coefficient -1/6
  classical  // +1/3, which makes the flat-domain constant chi/6
};

inline const char* to_string(CoefficientSet c) { return c == CoefficientSet::boundary_h ? "boundary-h" : "classical"; }

/// Small-time expansion of Z(T) = sum exp(-gamma_n / T).
struct HeatTraceModel {
  int dim = 2;
  double vol = 0.0;
  double bvol = 0.0;             // 0 for closed manifolds
  double integral_scalar = 0.0;  // integral of R dV
  double integral_quadratic = 0.0;  // integral of Q dV
  double integral_boundary_mean = 0.0;  // integral of H dS over the boundary
  bool has_boundary = false;
  CoefficientSet coefficients = CoefficientSet::boundary_h;

  double boundary_mean_coefficient() const { return coefficients == CoefficientSet::boundary_h ? -1.0 / 6.0 : 1.0 / 3.0; }
};

namespace detail {

// Terms are c_k * T^{p_k}; returned as (coefficient, power) pairs.
struct PowerTerm {
  double coef;
  double power;
};

inline std::vector<PowerTerm> heat_terms(const HeatTraceModel& m) {
  const double d = m.dim;
  const double pref = std::pow(4.0 * std::numbers::pi, -0.5 * d);
  std::vector<PowerTerm> terms;
  terms.push_back({pref * m.vol, 0.5 * d});
  if (m.has_boundary)
    terms.push_back({-pref * std::sqrt(4.0 * std::numbers::pi) * m.bvol / 4.0, 0.5 * (d - 1.0)});
  double curvature = m.integral_scalar / 6.0;
  if (m.has_boundary) curvature += m.boundary_mean_coefficient() * m.integral_boundary_mean;
  terms.push_back({pref * curvature, 0.5 * d - 1.0});
  terms.push_back({pref * m.integral_quadratic / 180.0, 0.5 * d - 2.0});
  return terms;
}

}  // namespace detail

inline double heat_trace_model(const HeatTraceModel& m, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  double z = 0.0;
  for (const auto& t : detail::heat_terms(m)) z += t.coef * std::pow(temperature, t.power);
  return z;
}

/// dZ/dT of the model, term by term.
inline double heat_trace_model_derivative(const HeatTraceModel& m, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  double dz = 0.0;
  for (const auto& t : detail::heat_terms(m))
    if (t.power != 0.0) dz += t.coef * t.power * std::pow(temperature, t.power - 1.0);
  return dz;
}

/// Flat 2-D domain with boundary: integral of H over the boundary is the
/// total turning 2 pi chi.
inline HeatTraceModel flat_domain_model(double area, double perimeter, double euler_characteristic,
                                        CoefficientSet set) {
  HeatTraceModel m;
  m.dim = 2;
  m.vol = area;
  m.bvol = perimeter;
  m.integral_boundary_mean = 2.0 * std::numbers::pi * euler_characteristic;
  m.has_boundary = true;
  m.coefficients = set;
  return m;
}

inline HeatTraceModel flat_torus_model(double area) {
  HeatTraceModel m;
  m.dim = 2;
  m.vol = area;
  return m;
}

struct PartitionEstimate {
  double value = 0.0;       // stored sum plus tail
  double tail_bound = 0.0;  // Weyl-density tail beyond the cutoff
};

/// Spectral sum plus the one-term Weyl tail (A/4 pi) T exp(-Lambda/T).
inline PartitionEstimate partition_function_from_spectrum(const spectral::Spectrum& s, double temperature,
                                                          double max_tail_fraction = 0.01) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  double sum = 0.0;
  // ascending order: add the small terms first
  const auto ev = s.eigenvalues();
  for (std::size_t i = ev.size(); i-- > 0;) sum += std::exp(-ev[i] / temperature);
  const double area = s.meta().area.value_or(0.0);
  const double tail = area / (4.0 * std::numbers::pi) * temperature * std::exp(-s.complete_up_to() / temperature);
  PartitionEstimate out{sum + tail, tail};
  if (tail > max_tail_fraction * out.value)
    throw Error(ErrorCode::TailDominates, "tail bound exceeds the allowed fraction of Z; lower T or raise the cutoff");
  return out;
}

struct ConstantFit {
  double const_term = 0.0;
  double linear = 0.0;     // coefficient of T
  double sqrt_term = 0.0;  // coefficient of sqrt(T)
  double residual = 0.0;
  bool pinned = false;
};

/// Least squares of Z(T) - a T - b sqrt(T) for the constant term. With
/// `pinned_geometry` = (area, perimeter) the slopes are fixed at A/4 pi and
/// -L/(8 sqrt(pi)); otherwise all three coefficients are fitted.
inline ConstantFit heat_trace_constant_extract(const spectral::Spectrum& s, std::span<const double> temperatures,
                                               std::optional<std::pair<double, double>> pinned_geometry = {}) {
  if (temperatures.size() < 3) throw Error(ErrorCode::InvalidArgument, "constant extraction needs >= 3 temperatures");
  std::vector<double> z;
  for (double t : temperatures) z.push_back(partition_function_from_spectrum(s, t).value);
  ConstantFit fit;
  const std::size_t n = temperatures.size();
  if (pinned_geometry) {
    fit.pinned = true;
    fit.linear = pinned_geometry->first / (4.0 * std::numbers::pi);
    fit.sqrt_term = -pinned_geometry->second / (8.0 * std::sqrt(std::numbers::pi));
    double sum = 0.0;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = z[i] - fit.linear * temperatures[i] - fit.sqrt_term * std::sqrt(temperatures[i]);
      sum += r[i];
    }
    fit.const_term = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : r) ss += (v - fit.const_term) * (v - fit.const_term);
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
  }
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = temperatures[i];
    design(r, 1) = std::sqrt(temperatures[i]);
    design(r, 2) = 1.0;
    rhs[r] = z[i];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  fit.linear = coef[0];
  fit.sqrt_term = coef[1];
  fit.const_term = coef[2];
  fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
  return fit;
}

}  // namespace specflow::asym
