#pragma once

// Axisymmetric closed surfaces in R^3 given by a meridian profile (rho, z)
// from the south pole to the north pole. Normal/tangential (lapse/shift)
// evolution, volume-preserving mean-curvature flow, ADM consistency checks
// and boundary-metric variance steps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specflow/core/csv.hpp"
#include "specflow/core/error.hpp"
#include "specflow/core/random.hpp"
#include "specflow/core/spline.hpp"
#include "specflow/core/vec2.hpp"
#include "specflow/plane_curve.hpp"

namespace specflow::hyper {

/// Profile nodes j = 0..n with x = rho, y = z; both ends on the axis.
/// `param_step` is the spacing of the material coordinate u.
class AxisymSurface {
 public:
  AxisymSurface(std::vector<Vec2> nodes, double param_step) : nodes_(std::move(nodes)), du_(param_step) {
    if (nodes_.size() < 7) throw Error(ErrorCode::TooFewPoints, "profile needs at least 7 nodes");
    if (!(du_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "parameter step must be positive");
    nodes_.front().x = 0.0;
    nodes_.back().x = 0.0;
    for (std::size_t j = 1; j + 1 < nodes_.size(); ++j)
      if (!(nodes_[j].x > 0.0)) throw Error(ErrorCode::AxisCrossing, "profile touches the axis at node " + std::to_string(j));
  }

  std::span<const Vec2> nodes() const { return nodes_; }
  std::size_t intervals() const { return nodes_.size() - 1; }
  double param_step() const { return du_; }
  double param_length() const { return du_ * static_cast<double>(intervals()); }

  /// Node j of the reflected profile; -n <= j <= 2n.
  Vec2 extended(long j) const {
    const long n = static_cast<long>(intervals());
    if (j < 0) return {-nodes_[static_cast<std::size_t>(-j)].x, nodes_[static_cast<std::size_t>(-j)].y};
    if (j > n) return {-nodes_[static_cast<std::size_t>(2 * n - j)].x, nodes_[static_cast<std::size_t>(2 * n - j)].y};
    return nodes_[static_cast<std::size_t>(j)];
  }

  /// Closed counter-clockwise meridian: the profile and its mirror image.
  std::vector<Vec2> closed_meridian() const {
    std::vector<Vec2> loop(nodes_.begin(), nodes_.end());
    for (std::size_t j = intervals() - 1; j >= 1; --j) loop.push_back({-nodes_[j].x, nodes_[j].y});
    return loop;
  }

 private:
  std::vector<Vec2> nodes_;
  double du_;
};

/// Validates the profile (simple meridian, positive volume).
inline AxisymSurface make_axisym_surface(std::vector<Vec2> nodes, double param_step) {
  AxisymSurface s(std::move(nodes), param_step);
  const auto loop = s.closed_meridian();
  if (!curve::is_simple(loop)) throw Error(ErrorCode::SelfIntersecting, "meridian profile crosses itself");
  if (!(curve::signed_area(loop) > 0.0)) throw Error(ErrorCode::InvalidArgument, "profile must run south to north with rho > 0");
  return s;
}

/// Profile with n intervals equally spaced in arclength along the periodic
/// spline through the closed meridian.
inline AxisymSurface reparametrize_uniform(const AxisymSurface& s) {
  const std::size_t n = s.intervals();
  const ClosedSpline2D spline(s.closed_meridian());
  auto pts = spline.resample_uniform(2 * n);
  pts.resize(n + 1);
  pts.back().x = 0.0;
  return AxisymSurface(std::move(pts), spline.arclength() / static_cast<double>(2 * n));
}

/// Spheroid with semi-axis `polar` along z and `equatorial` in rho,
/// uniform in arclength.
inline AxisymSurface spheroid_profile(std::size_t n, double polar, double equatorial) {
  const std::size_t fine = std::max<std::size_t>(8 * n, 2048);
  std::vector<Vec2> loop;
  for (std::size_t k = 0; k < 2 * fine; ++k) {
    const double th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(fine);
    loop.push_back({equatorial * std::sin(th), -polar * std::cos(th)});
  }
  const ClosedSpline2D spline(loop);
  auto pts = spline.resample_uniform(2 * n);
  pts.resize(n + 1);
  pts.front() = {0.0, -polar};
  pts.back() = {0.0, polar};
  return make_axisym_surface(std::move(pts), spline.arclength() / static_cast<double>(2 * n));
}

inline AxisymSurface sphere_profile(std::size_t n, double radius) {
  std::vector<Vec2> pts(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double u = std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    pts[j] = {radius * std::sin(u), -radius * std::cos(u)};
  }
  return make_axisym_surface(std::move(pts), radius * std::numbers::pi / static_cast<double>(n));
}

/// End-corrected trapezoid weights (3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8),
/// fourth order on n + 1 nodes.
inline std::vector<double> gregory_weights(std::size_t nodes) {
  if (nodes < 6) throw Error(ErrorCode::TooFewPoints, "end-corrected rule needs >= 6 nodes");
  std::vector<double> w(nodes, 1.0);
  const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (std::size_t k = 0; k < 3; ++k) {
    w[k] = ends[k];
    w[nodes - 1 - k] = ends[k];
  }
  return w;
}

/// Per-node geometry in (u, theta) coordinates.
struct AxisymGeometry {
  std::vector<Vec2> tangent;  // dX/du, fourth-order central difference
  std::vector<Vec2> normal;   // outward unit normal in the meridian plane
  std::vector<double> g_ss, g_tt, h_ss, h_tt;
  std::vector<double> kappa_meridian, kappa_parallel, mean_curvature;
  std::vector<double> area_weight;  // dS_j: quadrature weight of the area element
  double area = 0.0;
  double volume = 0.0;          // (1/3) integral of X . nu dS
  double volume_pappus = 0.0;   // pi integral of rho^2 dz
  double mean_h = 0.0;          // area average of H
};

inline AxisymGeometry compute_geometry(const AxisymSurface& s) {
  const std::size_t n = s.intervals();
  const double du = s.param_step();
  const auto greg = gregory_weights(n + 1);
  AxisymGeometry g;
  g.tangent.resize(n + 1);
  g.normal.resize(n + 1);
  g.g_ss.resize(n + 1);
  g.g_tt.resize(n + 1);
  g.h_ss.resize(n + 1);
  g.h_tt.resize(n + 1);
  g.kappa_meridian.resize(n + 1);
  g.kappa_parallel.resize(n + 1);
  g.mean_curvature.resize(n + 1);
  g.area_weight.resize(n + 1);
  double h_num = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const long jj = static_cast<long>(j);
    const Vec2 prev = s.extended(jj - 1);
    const Vec2 here = s.extended(jj);
    const Vec2 next = s.extended(jj + 1);
    const Vec2 wide = s.extended(jj + 2) - s.extended(jj - 2);
    const Vec2 dx = ((next - prev) * 8.0 - wide) * (1.0 / (12.0 * du));
    const Vec2 nu = rotate_cw(dx) * (1.0 / norm(dx));
    const double km = curve::menger_curvature(prev, here, next);
    const bool pole = (j == 0 || j == n);
    const double kp = pole ? km : nu.x / here.x;
    g.tangent[j] = dx;
    g.normal[j] = nu;
    g.g_ss[j] = dot(dx, dx);
    g.g_tt[j] = here.x * here.x;
    g.kappa_meridian[j] = km;
    g.kappa_parallel[j] = kp;
    g.h_ss[j] = km * g.g_ss[j];
    g.h_tt[j] = here.x * nu.x;
    g.mean_curvature[j] = km + kp;
    const double ds = 2.0 * std::numbers::pi * here.x * norm(dx) * du * greg[j];
    g.area_weight[j] = ds;
    g.area += ds;
    g.volume += ds * dot(here, nu) / 3.0;
    g.volume_pappus += std::numbers::pi * here.x * here.x * dx.y * du * greg[j];
    h_num += ds * g.mean_curvature[j];
  }
  g.mean_h = h_num / g.area;
  return g;
}

struct MetricField {
  std::vector<double> g_ss, g_tt;
};

inline MetricField induced_metric(const AxisymSurface& s) {
  auto g = compute_geometry(s);
  return {std::move(g.g_ss), std::move(g.g_tt)};
}

struct SecondFundamentalForm {
  std::vector<double> h_ss, h_tt, mean_curvature;
  double mean_h = 0.0;
};

inline SecondFundamentalForm second_fundamental_form(const AxisymSurface& s) {
  auto g = compute_geometry(s);
  return {std::move(g.h_ss), std::move(g.h_tt), std::move(g.mean_curvature), g.mean_h};
}

struct Functionals {
  double area = 0.0;
  double volume = 0.0;
  double volume_pappus = 0.0;
};

inline Functionals geometry_functionals(const AxisymSurface& s) {
  const auto g = compute_geometry(s);
  return {g.area, g.volume, g.volume_pappus};
}

/// Normal speed N and tangential shift component N^u per node.
struct LapseShift {
  std::vector<double> lapse;
  std::vector<double> shift;
};

/// N = h - H, zero shift.
inline LapseShift vpmcf_velocity(const AxisymSurface& s) {
  const auto g = compute_geometry(s);
  LapseShift ls;
  ls.lapse.resize(g.mean_curvature.size());
  ls.shift.assign(g.mean_curvature.size(), 0.0);
  for (std::size_t j = 0; j < ls.lapse.size(); ++j) ls.lapse[j] = g.mean_h - g.mean_curvature[j];
  return ls;
}

/// Integral of N dS.
inline double lapse_integral(const AxisymSurface& s, const LapseShift& ls) {
  const auto g = compute_geometry(s);
  double sum = 0.0;
  for (std::size_t j = 0; j < ls.lapse.size(); ++j) sum += g.area_weight[j] * ls.lapse[j];
  return sum;
}

struct LapseStepOptions {
  double c_stab = 0.25;  // dt <= c_stab du^2 / max(1, max|H|)
  bool reparametrize = true;
  bool enforce_bound = true;
};

inline double stable_step_bound(const AxisymSurface& s, double c_stab) {
  const auto g = compute_geometry(s);
  double hmax = 0.0;
  for (double v : g.mean_curvature) hmax = std::max(hmax, std::abs(v));
  return c_stab * s.param_step() * s.param_step() / std::max(1.0, hmax);
}

namespace detail {

inline std::vector<Vec2> displaced(const AxisymSurface& s, const AxisymGeometry& g, const LapseShift& ls, double dt) {
  const auto nodes = s.nodes();
  std::vector<Vec2> out(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    out[j] = nodes[j] + (g.normal[j] * ls.lapse[j] + g.tangent[j] * ls.shift[j]) * dt;
  out.front().x = 0.0;
  out.back().x = 0.0;
  return out;
}

}  // namespace detail

/// Euler step X += dt (N nu + N^u dX/du), then optional uniform
/// reparametrization.
inline AxisymSurface lapse_shift_step(const AxisymSurface& s, const LapseShift& ls, double dt,
                                      const LapseStepOptions& opt = {}) {
  if (ls.lapse.size() != s.nodes().size() || ls.shift.size() != s.nodes().size())
    throw Error(ErrorCode::InvalidArgument, "lapse/shift size does not match the profile");
  if (opt.enforce_bound) {
    const double bound = stable_step_bound(s, opt.c_stab);
    if (dt > bound)
      throw Error(ErrorCode::StepTooLarge, "dt " + format_double(dt) + " exceeds the bound " + format_double(bound));
  }
  const auto g = compute_geometry(s);
  AxisymSurface next(detail::displaced(s, g, ls, dt), s.param_step());
  return opt.reparametrize ? reparametrize_uniform(next) : next;
}

/// Midpoint (RK2) step of the volume-preserving mean-curvature flow.
inline AxisymSurface vpmcf_step(const AxisymSurface& s, double dt, const LapseStepOptions& opt = {}) {
  if (opt.enforce_bound) {
    const double bound = stable_step_bound(s, opt.c_stab);
    if (dt > bound)
      throw Error(ErrorCode::StepTooLarge, "dt " + format_double(dt) + " exceeds the bound " + format_double(bound));
  }
  const auto g0 = compute_geometry(s);
  const AxisymSurface mid(detail::displaced(s, g0, vpmcf_velocity(s), 0.5 * dt), s.param_step());
  AxisymSurface next(detail::displaced(s, g0, vpmcf_velocity(mid), dt), s.param_step());
  return opt.reparametrize ? reparametrize_uniform(next) : next;
}

/// Leading open-manifold rate -(T^{-1/2} sqrt(4 pi) / (8 Vol M)) integral N H dS.
inline double open_entropy_rate(const AxisymSurface& s, const LapseShift& ls, double temperature,
                                double enclosed_volume) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const auto g = compute_geometry(s);
  double integral = 0.0;
  for (std::size_t j = 0; j < ls.lapse.size(); ++j) integral += g.area_weight[j] * ls.lapse[j] * g.mean_curvature[j];
  return -std::sqrt(4.0 * std::numbers::pi) / (8.0 * std::sqrt(temperature) * enclosed_volume) * integral;
}

// -- VPMCF runs ---------------------------------------------------------------------

struct VpmcfRecord {
  std::size_t step = 0;
  double t = 0.0;
  double area = 0.0;
  double volume = 0.0;
  double mean_h = 0.0;
  double max_deviation = 0.0;  // max |H - h|
  double entropy_rate = 0.0;
  double lapse_integral = 0.0;
};

struct VpmcfTrace {
  std::vector<VpmcfRecord> records;
  std::vector<std::pair<std::size_t, AxisymSurface>> snapshots;
  bool converged = false;
  std::optional<Error> halted;
};

struct VpmcfOptions {
  double tolerance = 1e-6;  // stop once max|H - h| falls below
  double c_stab = 0.25;
  std::size_t reparametrize_every = 1;
  double temperature = 100.0;
  std::size_t snapshot_stride = 0;
};

inline VpmcfRecord measure(const AxisymSurface& s, std::size_t step, double t, double temperature) {
  const auto g = compute_geometry(s);
  VpmcfRecord r;
  r.step = step;
  r.t = t;
  r.area = g.area;
  r.volume = g.volume;
  r.mean_h = g.mean_h;
  double integral_n = 0.0, integral_nh = 0.0;
  for (std::size_t j = 0; j < g.mean_curvature.size(); ++j) {
    const double lapse = g.mean_h - g.mean_curvature[j];
    r.max_deviation = std::max(r.max_deviation, std::abs(lapse));
    integral_n += g.area_weight[j] * lapse;
    integral_nh += g.area_weight[j] * lapse * g.mean_curvature[j];
  }
  r.lapse_integral = integral_n;
  r.entropy_rate = -std::sqrt(4.0 * std::numbers::pi) / (8.0 * std::sqrt(temperature) * g.volume) * integral_nh;
  return r;
}

inline VpmcfTrace run_vpmcf(const AxisymSurface& s0, double t_end, double dt, const VpmcfOptions& opt = {}) {
  if (!(t_end > 0.0 && dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end and dt must be positive");
  VpmcfTrace trace;
  AxisymSurface s = s0;
  trace.records.push_back(measure(s, 0, 0.0, opt.temperature));
  trace.snapshots.emplace_back(0, s);
  if (trace.records.back().max_deviation < opt.tolerance) {
    trace.converged = true;
    return trace;
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t every = std::max<std::size_t>(opt.reparametrize_every, 1);
  for (std::size_t k = 1; k <= steps; ++k) {
    LapseStepOptions lo;
    lo.c_stab = opt.c_stab;
    lo.reparametrize = (k % every == 0);
    try {
      s = vpmcf_step(s, dt, lo);
    } catch (const Error& e) {
      trace.halted = e;
      break;
    }
    trace.records.push_back(measure(s, k, static_cast<double>(k) * dt, opt.temperature));
    const bool done = trace.records.back().max_deviation < opt.tolerance;
    if ((opt.snapshot_stride > 0 && k % opt.snapshot_stride == 0) || k == steps || done) trace.snapshots.emplace_back(k, s);
    if (done) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

// -- ADM consistency ----------------------------------------------------------------

/// Seeded smooth lapse sum a_k cos(k pi u / U) and shift sum b_k sin(k pi u / U);
/// the shift vanishes on the axis.
inline LapseShift random_lapse_shift(const AxisymSurface& s, std::uint64_t seed, int modes = 4,
                                     double amplitude = 0.3) {
  Rng rng(derive_seed(seed, "lapse-shift"));
  std::vector<double> a(static_cast<std::size_t>(modes) + 1), b(static_cast<std::size_t>(modes) + 1);
  for (int k = 0; k <= modes; ++k) {
    a[static_cast<std::size_t>(k)] = amplitude * rng.uniform(-1.0, 1.0) / (1.0 + k);
    b[static_cast<std::size_t>(k)] = amplitude * rng.uniform(-1.0, 1.0) / (1.0 + k);
  }
  const double total = s.param_length();
  LapseShift ls;
  for (std::size_t j = 0; j < s.nodes().size(); ++j) {
    const double u = s.param_step() * static_cast<double>(j);
    double lapse = 0.0, shift = 0.0;
    for (int k = 0; k <= modes; ++k) {
      const double arg = k * std::numbers::pi * u / total;
      lapse += a[static_cast<std::size_t>(k)] * std::cos(arg);
      if (k > 0) shift += b[static_cast<std::size_t>(k)] * std::sin(arg);
    }
    ls.lapse.push_back(lapse);
    ls.shift.push_back(shift);
  }
  ls.shift.front() = 0.0;
  ls.shift.back() = 0.0;
  return ls;
}

struct AdmResidual {
  double metric = 0.0;     // max |(g(t+dt) - g(t))/dt - (2 N h + shift terms)|
  double curvature = 0.0;  // max |(h(t+dt) - h(t))/dt - (-Hess N + N h h + shift terms)|
};

namespace detail {

// Central differences on the reflected profile; `odd` flips sign across the axis.
inline double ddu(const std::vector<double>& f, std::size_t j, double du, bool odd) {
  const std::size_t n = f.size() - 1;
  const double s = odd ? -1.0 : 1.0;
  const double left = j == 0 ? s * f[1] : f[j - 1];
  const double right = j == n ? s * f[n - 1] : f[j + 1];
  return (right - left) / (2.0 * du);
}

inline double d2du(const std::vector<double>& f, std::size_t j, double du) {
  const std::size_t n = f.size() - 1;
  const double left = j == 0 ? f[1] : f[j - 1];
  const double right = j == n ? f[n - 1] : f[j + 1];
  return (right - 2.0 * f[j] + left) / (du * du);
}

}  // namespace detail

/// Forward-difference residuals of the first and second variation formulas
/// for one unreparametrized Euler step.
inline AdmResidual adm_residuals(const AxisymSurface& s, const LapseShift& ls, double dt) {
  const auto g0 = compute_geometry(s);
  const AxisymSurface moved(detail::displaced(s, g0, ls, dt), s.param_step());
  const auto g1 = compute_geometry(moved);
  const double du = s.param_step();
  const std::size_t n = s.intervals();
  std::vector<double> rho(n + 1);
  for (std::size_t j = 0; j <= n; ++j) rho[j] = s.nodes()[j].x;
  AdmResidual res;
  for (std::size_t j = 0; j <= n; ++j) {
    const double lapse = ls.lapse[j];
    const double shift = ls.shift[j];
    const double dshift = detail::ddu(ls.shift, j, du, true);
    const double dlapse = detail::ddu(ls.lapse, j, du, false);
    const double d2lapse = detail::d2du(ls.lapse, j, du);
    const double dg_ss = detail::ddu(g0.g_ss, j, du, false);
    const double dh_ss = detail::ddu(g0.h_ss, j, du, false);
    const double dh_tt = detail::ddu(g0.h_tt, j, du, false);
    const double drho = detail::ddu(rho, j, du, true);
    const double gss = g0.g_ss[j];
    const double hss = g0.h_ss[j];
    const double htt = g0.h_tt[j];

    const double pred_g_ss = 2.0 * lapse * hss + 2.0 * gss * dshift + dg_ss * shift;
    const double pred_g_tt = 2.0 * lapse * htt + 2.0 * rho[j] * drho * shift;
    const double hess_ss = d2lapse - dg_ss / (2.0 * gss) * dlapse;
    const double hess_tt = rho[j] * drho / gss * dlapse;
    const double pred_h_ss = -hess_ss + lapse * hss * hss / gss + shift * dh_ss + 2.0 * hss * dshift;
    const double pred_h_tt = -hess_tt + lapse * g0.kappa_parallel[j] * htt + shift * dh_tt;

    const double r_g_ss = (g1.g_ss[j] - g0.g_ss[j]) / dt - pred_g_ss;
    const double r_g_tt = (g1.g_tt[j] - g0.g_tt[j]) / dt - pred_g_tt;
    const double r_h_ss = (g1.h_ss[j] - g0.h_ss[j]) / dt - pred_h_ss;
    const double r_h_tt = (g1.h_tt[j] - g0.h_tt[j]) / dt - pred_h_tt;
    res.metric = std::max({res.metric, std::abs(r_g_ss), std::abs(r_g_tt)});
    res.curvature = std::max({res.curvature, std::abs(r_h_ss), std::abs(r_h_tt)});
  }
  return res;
}

// -- variance steps ---------------------------------------------------------------------

struct VarianceStep {
  MetricField metric;  // updated boundary metric
  double measured = 0.0;   // Vol(g') - Vol(g) by quadrature
  double predicted = 0.0;  // variance formula
};

namespace detail {

inline double metric_area(const AxisymSurface& s, const MetricField& m) {
  const auto greg = gregory_weights(m.g_ss.size());
  double a = 0.0;
  for (std::size_t j = 0; j < m.g_ss.size(); ++j)
    a += 2.0 * std::numbers::pi * std::sqrt(m.g_ss[j] * m.g_tt[j]) * s.param_step() * greg[j];
  return a;
}

inline std::pair<double, double> weighted_moments(const AxisymGeometry& g, const std::vector<double>& q) {
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    m1 += g.area_weight[j] * q[j];
    m2 += g.area_weight[j] * q[j] * q[j];
  }
  return {m1 / g.area, m2 / g.area};
}

}  // namespace detail

/// Conformal step dg = dt q (<q> - q) g; prediction -dt Vol (d/2) var(q)
/// with d = 2 the boundary dimension.
inline VarianceStep variance_flow_step(const AxisymSurface& s, const std::vector<double>& q, double dt) {
  if (q.size() != s.nodes().size()) throw Error(ErrorCode::InvalidArgument, "scalar field size mismatch");
  const auto g = compute_geometry(s);
  const auto [mean, mean_sq] = detail::weighted_moments(g, q);
  VarianceStep out;
  out.metric.g_ss = g.g_ss;
  out.metric.g_tt = g.g_tt;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double p = q[j] * (mean - q[j]);
    out.metric.g_ss[j] *= 1.0 + dt * p;
    out.metric.g_tt[j] *= 1.0 + dt * p;
  }
  const double before = detail::metric_area(s, {g.g_ss, g.g_tt});
  out.measured = detail::metric_area(s, out.metric) - before;
  out.predicted = -dt * before * (2.0 / 2.0) * (mean_sq - mean * mean);
  return out;
}

enum class TensorChoice { second_fundamental_form };

/// Tensor step dg_ij = dt (<m> - m) m_ij with m_ij = h_ij and m = H;
/// prediction -(dt/2) Vol var(H).
inline VarianceStep variance_flow_step(const AxisymSurface& s, TensorChoice, double dt) {
  const auto g = compute_geometry(s);
  const auto [mean, mean_sq] = detail::weighted_moments(g, g.mean_curvature);
  VarianceStep out;
  out.metric.g_ss = g.g_ss;
  out.metric.g_tt = g.g_tt;
  for (std::size_t j = 0; j < g.g_ss.size(); ++j) {
    const double c = mean - g.mean_curvature[j];
    out.metric.g_ss[j] += dt * c * g.h_ss[j];
    out.metric.g_tt[j] += dt * c * g.h_tt[j];
  }
  const double before = detail::metric_area(s, {g.g_ss, g.g_tt});
  out.measured = detail::metric_area(s, out.metric) - before;
  out.predicted = -0.5 * dt * before * (mean_sq - mean * mean);
  return out;
}

// -- output -------------------------------------------------------------------------------

inline void write_profile_csv(const AxisymSurface& s, const std::string& path) {
  CsvWriter out(path, {"u", "rho", "z"});
  for (std::size_t j = 0; j < s.nodes().size(); ++j)
    out.row({s.param_step() * static_cast<double>(j), s.nodes()[j].x, s.nodes()[j].y});
}

inline void write_vpmcf_trace_csv(const VpmcfTrace& trace, const std::string& path) {
  CsvWriter out(path, {"step", "t", "area", "volume", "h", "maxdev", "entropy_rate"});
  for (const auto& r : trace.records)
    out.row(static_cast<long long>(r.step), {r.t, r.area, r.volume, r.mean_h, r.max_deviation, r.entropy_rate});
}

}  // namespace specflow::hyper
