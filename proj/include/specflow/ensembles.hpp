#pragma once

// Microcanonical and canonical entropies built from spectra or asymptotic
// models, and entropy rates along flow traces.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "specflow/asymptotics.hpp"
#include "specflow/core/error.hpp"
#include "specflow/spectrum/spectrum.hpp"
#include "specflow/surface/metric.hpp"

namespace specflow::ens {

// -- microcanonical -----------------------------------------------------------

struct MicrocanonicalEntropy {
  double density = 0.0;  // nu(E)
  double boltzmann = 0.0;  // ln(nu dE)
  double surface = 0.0;    // ln(nu)
};

inline MicrocanonicalEntropy entropies_from_density(double density, double energy_width) {
  if (!(density > 0.0)) throw Error(ErrorCode::EmptyWindow, "density of states vanishes in the window");
  if (!(energy_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy width must be positive");
  return {density, std::log(density * energy_width), std::log(density)};
}

/// nu from the spectrum's counting function over [E, E + window].
inline MicrocanonicalEntropy microcanonical_entropy(const spectral::Spectrum& s, double energy, double window,
                                                    double energy_width = 1.0) {
  return entropies_from_density(spectral::density_of_states(s, energy, window), energy_width);
}

enum class DensityOrder {
  leading,   // nu = d c0 E^{d/2-1} / 2
  two_term,  // derivative of both Weyl terms
  log_expanded  // ln nu expanded to first order in E^{-1/2}
};

/// How the unit-ball constant of the boundary term is read.
enum class OmegaConvention {
  sphere_area,  // omega_1 = 2 pi, the unit circle length: d=2 coefficient pi/2
  unit_ball  // omega_{d-1} = unit-ball volume, consistent with the Weyl constants: coefficient 1/2
};

inline double omega_for_boundary(int dim, OmegaConvention c) {
  if (c == OmegaConvention::unit_ball || dim != 2) return asym::unit_ball_volume(dim - 1);
  return 2.0 * std::numbers::pi;
}

/// S_surf = ln(d w_d E^{(d-2)/2} vol / (2 (2 pi)^d)) - 2 pi (d-1) w_{d-1} / (4 d w_d) E^{-1/2} bvol/vol.
inline double surface_entropy_expansion(int dim, double energy, double vol, double bvol,
                                        OmegaConvention c = OmegaConvention::sphere_area) {
  if (!(energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy must be positive");
  const double d = dim;
  const double wd = asym::unit_ball_volume(dim);
  const double lead = std::log(d * wd * std::pow(energy, 0.5 * (d - 2.0)) * vol / (2.0 * std::pow(2.0 * std::numbers::pi, d)));
  const double coef = 2.0 * std::numbers::pi * (d - 1.0) * omega_for_boundary(dim, c) / (4.0 * d * wd);
  return lead - coef * bvol / (vol * std::sqrt(energy));
}

/// nu from the Weyl model at the requested order.
inline MicrocanonicalEntropy microcanonical_entropy(const asym::WeylModel& m, double energy, double energy_width = 1.0,
                                                    DensityOrder order = DensityOrder::leading) {
  if (!(energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy must be positive");
  const double d = m.dim;
  const double leading = 0.5 * d * m.c0() * std::pow(energy, 0.5 * d - 1.0);
  switch (order) {
    case DensityOrder::leading:
      return entropies_from_density(leading, energy_width);
    case DensityOrder::two_term:
      return entropies_from_density(asym::weyl_density(m, energy), energy_width);
    case DensityOrder::log_expanded: {
      // ln(a - b) = ln a - b/a + O((b/a)^2)
      const double sub = 0.5 * (d - 1.0) * m.c1() * std::pow(energy, 0.5 * (d - 1.0) - 1.0);
      const double s = std::log(leading) - sub / leading;
      const double nu = std::exp(s);
      if (!(nu > 0.0)) throw Error(ErrorCode::EmptyWindow, "model density vanishes");
      return {nu, s + std::log(energy_width), s};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown density order");
}

// -- canonical ----------------------------------------------------------------

/// Anything that supplies ln Z(T).
template <class S>
concept PartitionSource = requires(const S& s, double t) {
  { s.log_z(t) } -> std::convertible_to<double>;
};

/// Sources that also know d ln Z / dT in closed form.
template <class S>
concept AnalyticPartitionSource = PartitionSource<S> && requires(const S& s, double t) {
  { s.dlog_z(t) } -> std::convertible_to<double>;
};

struct SpectrumPartition {
  const spectral::Spectrum* spectrum;
  double max_tail_fraction = 0.01;

  /// ln sum exp(-g/T), shifted by the lowest level so that small T does
  /// not underflow.
  double log_z(double t) const {
    const auto ev = spectrum->eigenvalues();
    if (ev.empty()) throw Error(ErrorCode::NonpositiveZ, "empty spectrum");
    const double g0 = ev.front();
    double sum = 0.0;
    for (std::size_t i = ev.size(); i-- > 0;) sum += std::exp(-(ev[i] - g0) / t);
    const double area = spectrum->meta().area.value_or(0.0);
    const double tail = area / (4.0 * std::numbers::pi) * t * std::exp(-(spectrum->complete_up_to() - g0) / t);
    if (tail > max_tail_fraction * (sum + tail))
      throw Error(ErrorCode::TailDominates, "tail bound exceeds the allowed fraction of Z");
    return std::log(sum + tail) - g0 / t;
  }
};

struct HeatTracePartition {
  asym::HeatTraceModel model;

  double log_z(double t) const {
    const double z = asym::heat_trace_model(model, t);
    if (!(z > 0.0)) throw Error(ErrorCode::NonpositiveZ, "model partition function is not positive");
    return std::log(z);
  }
  double dlog_z(double t) const { return asym::heat_trace_model_derivative(model, t) / asym::heat_trace_model(model, t); }
};

/// Closed surface: ln Z truncated at T^{-2} after expanding the logarithm,
/// ln(T V / 4 pi) + <R>/(6T) + <Q>/(180 T^2) - <R>^2/(72 T^2), Q = 3 R^2.
struct ClosedSurfaceExpansion {
  double vol = 0.0;
  double mean_r = 0.0;
  double mean_r2 = 0.0;

  double log_z(double t) const {
    return std::log(t * vol / (4.0 * std::numbers::pi)) + mean_r / (6.0 * t) + mean_r2 / (60.0 * t * t) -
           mean_r * mean_r / (72.0 * t * t);
  }
  double dlog_z(double t) const {
    return 1.0 / t - mean_r / (6.0 * t * t) - mean_r2 / (30.0 * t * t * t) + mean_r * mean_r / (36.0 * t * t * t);
  }
};

enum class Differentiation { automatic, analytic, finite_difference };

struct DerivativeOptions {
  Differentiation mode = Differentiation::automatic;
  double relative_step = 1e-4;
};

struct ThermoState {
  double temperature = 0.0;
  double log_z = 0.0;
  double dlog_z = 0.0;  // d ln Z / dT
  double entropy = 0.0;  // ln Z + T d ln Z/dT
  double energy = 0.0;   // T^2 d ln Z/dT
  double derivative_error = 0.0;  // Richardson estimate; 0 on the analytic branch
};

namespace detail {

// 4th-order central difference with a half-step Richardson comparison.
template <class F>
std::pair<double, double> central_derivative(const F& f, double x, double step) {
  auto stencil = [&](double h) {
    return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
  };
  const double coarse = stencil(step);
  const double fine = stencil(0.5 * step);
  return {fine + (fine - coarse) / 15.0, std::abs(fine - coarse)};
}

}  // namespace detail

template <PartitionSource S>
ThermoState thermo_state(const S& src, double t, const DerivativeOptions& opt = {}) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  ThermoState st;
  st.temperature = t;
  st.log_z = src.log_z(t);
  bool analytic = false;
  if constexpr (AnalyticPartitionSource<S>) analytic = opt.mode != Differentiation::finite_difference;
  else if (opt.mode == Differentiation::analytic)
    throw Error(ErrorCode::InvalidArgument, "source has no closed-form derivative");
  if (analytic) {
    if constexpr (AnalyticPartitionSource<S>) st.dlog_z = src.dlog_z(t);
  } else {
    const auto [d, err] = detail::central_derivative([&](double x) { return src.log_z(x); }, t, opt.relative_step * t);
    st.dlog_z = d;
    st.derivative_error = err;
  }
  st.entropy = st.log_z + t * st.dlog_z;
  st.energy = t * t * st.dlog_z;
  return st;
}

template <PartitionSource S>
double gibbs_entropy(const S& src, double t, const DerivativeOptions& opt = {}) {
  return thermo_state(src, t, opt).entropy;
}

template <PartitionSource S>
double internal_energy(const S& src, double t, const DerivativeOptions& opt = {}) {
  return thermo_state(src, t, opt).energy;
}

struct ClosedSurfaceEntropy {
  double entropy = 0.0;
  double vol = 0.0;
  double mean_r = 0.0;
  double mean_r2 = 0.0;
  bool below_validity = false;  // the T^{-2} terms exceed the threshold fraction of the leading part
};

inline ClosedSurfaceExpansion closed_surface_expansion(const surface::WarpedMetric2D& m) {
  const surface::Field r = surface::scalar_curvature(m);
  return {surface::volume(m), surface::manifold_mean(m, r), surface::manifold_mean(m, r.cwiseProduct(r))};
}

/// S = ln(T Vol / 4 pi) + 1 - <R^2>/(60 T^2) + <R>^2/(72 T^2): the
/// truncated expansion differentiated term by term.
inline ClosedSurfaceEntropy gibbs_entropy_closed_d2(const surface::WarpedMetric2D& m, double t,
                                                    double validity_fraction = 0.1) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const ClosedSurfaceExpansion e = closed_surface_expansion(m);
  ClosedSurfaceEntropy out;
  out.vol = e.vol;
  out.mean_r = e.mean_r;
  out.mean_r2 = e.mean_r2;
  const double leading = std::log(t * e.vol / (4.0 * std::numbers::pi)) + 1.0;
  const double correction = (-e.mean_r2 / 60.0 + e.mean_r * e.mean_r / 72.0) / (t * t);
  out.entropy = leading + correction;
  out.below_validity = std::abs(correction) > validity_fraction * std::abs(leading);
  return out;
}

/// Per-sample dS/dt: central differences inside, one-sided at the ends.
inline std::vector<double> entropy_rate_along_flow(std::span<const double> t, std::span<const double> s) {
  if (t.size() != s.size() || t.size() < 2) throw Error(ErrorCode::InvalidArgument, "rate needs >= 2 matching samples");
  const std::size_t n = t.size();
  std::vector<double> rate(n);
  rate[0] = (s[1] - s[0]) / (t[1] - t[0]);
  rate[n - 1] = (s[n - 1] - s[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) rate[i] = (s[i + 1] - s[i - 1]) / (t[i + 1] - t[i - 1]);
  return rate;
}

}  // namespace specflow::ens
