#pragma once

// Intrinsic entropy flows of warped 2-metrics, the Perelman F functional
// and its gradient flow, and the maximally symmetric scale-factor ODE.

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "specflow/core/csv.hpp"
#include "specflow/core/error.hpp"
#include "specflow/ensembles.hpp"
#include "specflow/surface/metric.hpp"

namespace specflow::surface {

enum class FlowVariant {
  normalized,   // (R^2 - <R^2>)/4 g - Hess R: volume preserving
  unnormalized  // R^2/4 g - Hess R + g Lap R
};

inline const char* to_string(FlowVariant v) { return v == FlowVariant::normalized ? "normalized" : "unnormalized"; }

/// dg/dt for the chosen entropy flow.
inline DiagTensor entropy_flow_velocity(const WarpedMetric2D& m, FlowVariant variant) {
  const Field r = scalar_curvature(m);
  const Field r2 = r.cwiseProduct(r);
  const DiagTensor hess = covariant_hessian(m, r);
  Field conformal;
  if (variant == FlowVariant::normalized) {
    conformal = ((r2.array() - manifold_mean(m, r2)) / 4.0).matrix();
  } else {
    conformal = (r2.array() / 4.0).matrix() + tensor_trace(m, hess);
  }
  return {conformal.cwiseProduct(m.a()) - hess.xx, conformal.cwiseProduct(m.b()) - hess.yy};
}

/// Integral of g^{ij} dg_ij/dt over the surface.
inline double trace_integral(const WarpedMetric2D& m, const DiagTensor& rate) {
  return integrate(m, tensor_trace(m, rate));
}

struct SurfaceStepOptions {
  // RK4 on the linearized fourth-order part -k^4/2 needs c_stab <= 5.57/pi^4.
  double c_stab = 0.05;
};

/// dt <= c_stab h^4 / max(1, max|R|^3).
inline double stable_step_bound(const WarpedMetric2D& m, double c_stab) {
  const double h = m.grid().spacing();
  const double rmax = scalar_curvature(m).cwiseAbs().maxCoeff();
  return c_stab * std::pow(h, 4) / std::max(1.0, rmax * rmax * rmax);
}

namespace detail {

inline void check_step(const WarpedMetric2D& m, double dt, double c_stab) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  const double bound = stable_step_bound(m, c_stab);
  if (dt > bound)
    throw Error(ErrorCode::StepTooLarge, "dt " + format_double(dt) + " exceeds the bound " + format_double(bound));
}

}  // namespace detail

/// Classical RK4 on (A, B).
inline WarpedMetric2D flow_step(const WarpedMetric2D& m, FlowVariant variant, double dt,
                                const SurfaceStepOptions& opt = {}) {
  detail::check_step(m, dt, opt.c_stab);
  auto stage = [&](const WarpedMetric2D& base, const DiagTensor& k, double w) {
    return with_components(base, base.a() + w * k.xx, base.b() + w * k.yy);
  };
  const DiagTensor k1 = entropy_flow_velocity(m, variant);
  const DiagTensor k2 = entropy_flow_velocity(stage(m, k1, 0.5 * dt), variant);
  const DiagTensor k3 = entropy_flow_velocity(stage(m, k2, 0.5 * dt), variant);
  const DiagTensor k4 = entropy_flow_velocity(stage(m, k3, dt), variant);
  const Field a = m.a() + dt / 6.0 * (k1.xx + 2.0 * k2.xx + 2.0 * k3.xx + k4.xx);
  const Field b = m.b() + dt / 6.0 * (k1.yy + 2.0 * k2.yy + 2.0 * k3.yy + k4.yy);
  return with_components(m, a, b);
}

/// Right side of dR/dt = -R^{ij} v_ij + div div v - Lap(tr v) for a
/// diagonal rate v, with R_ij = (R/2) g_ij.
inline Field scalar_curvature_rate(const WarpedMetric2D& m, const DiagTensor& v) {
  const auto& g = m.grid();
  const Field& a = m.a();
  const Field& b = m.b();
  const Field r = scalar_curvature(m);
  const Field tr = tensor_trace(m, v);
  const Field sg = m.sqrt_det();
  // u_x = grad^k v_kx = (1/sqrt g) d(sqrt g v_xx / A) - (A' v_xx / A^2 + B' v_yy / B^2) / 2
  const Field flux1 = (sg.array() * v.xx.array() / a.array()).matrix();
  const Field da = g.d1(a, Parity::even);
  const Field db = g.d1(b, Parity::even);
  const Field ux = (g.d1(flux1, Parity::odd).array() / sg.array() -
                    0.5 * (da.array() * v.xx.array() / a.array().square() +
                           db.array() * v.yy.array() / b.array().square()))
                       .matrix();
  // grad^i u_i = (1/sqrt g) d(sqrt g u_x / A)
  const Field flux2 = (sg.array() * ux.array() / a.array()).matrix();
  const Field divdiv = (g.d1(flux2, Parity::even).array() / sg.array()).matrix();
  return (-0.5 * r.array() * tr.array()).matrix() + divdiv - laplacian(m, tr);
}

/// The closed form -(R/4)(R^2 - <R^2>) - |grad R|^2 / 2 stated for the
/// normalized flow.
inline Field closed_form_curvature_rate(const WarpedMetric2D& m) {
  const Field r = scalar_curvature(m);
  const Field r2 = r.cwiseProduct(r);
  return (-0.25 * r.array() * (r2.array() - manifold_mean(m, r2)) - 0.5 * gradient_norm2(m, r).array()).matrix();
}

/// The same rate with the -Lap(phi) term, phi = (R^2 - <R^2>)/4, that the
/// closed form omits.
inline Field corrected_curvature_rate(const WarpedMetric2D& m) {
  const Field r = scalar_curvature(m);
  const Field r2 = r.cwiseProduct(r);
  const Field phi = ((r2.array() - manifold_mean(m, r2)) / 4.0).matrix();
  return (-r.array() * phi.array() - 0.5 * gradient_norm2(m, r).array()).matrix() - laplacian(m, phi);
}

// -- entropy traces -------------------------------------------------------------

struct EntropyFlowRecord {
  std::size_t step = 0;
  double t = 0.0;
  double vol = 0.0;
  double mean_r = 0.0;
  double mean_r2 = 0.0;
  double entropy = 0.0;
  double rate_fd = 0.0;         // (S_k - S_{k-1}) / dt, 0 on the first record
  double rate_variance = 0.0;   // (<R^4> - <R^2>^2) / (240 T^2), interval average
  double rate_corrected = 0.0;  // variance term minus <R |grad R|^2> / (60 T^2), interval average
  double trace_integral = 0.0;
  double gauss_bonnet_defect = 0.0;
};

struct EntropyFlowTrace {
  std::vector<EntropyFlowRecord> records;
  std::vector<std::pair<std::size_t, WarpedMetric2D>> snapshots;
  std::optional<Error> halted;
};

struct EntropyRunOptions {
  double temperature = 100.0;
  double c_stab = 0.05;
  std::size_t snapshot_stride = 0;
};

namespace detail {

struct EntropySample {
  double vol, mean_r, mean_r2, var, grad_term, trace;
};

inline EntropySample sample(const WarpedMetric2D& m, FlowVariant variant) {
  const Field r = scalar_curvature(m);
  const Field r2 = r.cwiseProduct(r);
  EntropySample s;
  s.vol = volume(m);
  s.mean_r = integrate(m, r) / s.vol;
  s.mean_r2 = integrate(m, r2) / s.vol;
  s.var = integrate(m, r2.cwiseProduct(r2)) / s.vol - s.mean_r2 * s.mean_r2;
  s.grad_term = integrate(m, r.cwiseProduct(gradient_norm2(m, r))) / s.vol;
  s.trace = trace_integral(m, entropy_flow_velocity(m, variant));
  return s;
}

}  // namespace detail

/// Runs `steps` RK4 steps and records S_Gibbs (closed d=2 expansion) with
/// finite-difference and predicted rates. The finite-difference rate is
/// assembled from term-wise differences so that the large constant
/// ln(T Vol / 4 pi) + 1 does not swamp it.
inline EntropyFlowTrace run_entropy_flow(const WarpedMetric2D& initial, FlowVariant variant, std::size_t steps,
                                         double dt, const EntropyRunOptions& opt = {}) {
  EntropyFlowTrace trace;
  const double t2 = opt.temperature * opt.temperature;
  WarpedMetric2D m = initial;
  detail::EntropySample prev = detail::sample(m, variant);
  auto make_record = [&](std::size_t k, const detail::EntropySample& s) {
    EntropyFlowRecord r;
    r.step = k;
    r.t = static_cast<double>(k) * dt;
    r.vol = s.vol;
    r.mean_r = s.mean_r;
    r.mean_r2 = s.mean_r2;
    r.entropy = ens::gibbs_entropy_closed_d2(m, opt.temperature).entropy;
    r.trace_integral = s.trace;
    r.gauss_bonnet_defect = gauss_bonnet_defect(m);
    return r;
  };
  trace.records.push_back(make_record(0, prev));
  trace.snapshots.emplace_back(0, m);
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      m = flow_step(m, variant, dt, {opt.c_stab});
    } catch (const Error& e) {
      trace.halted = e;
      break;
    }
    const detail::EntropySample cur = detail::sample(m, variant);
    EntropyFlowRecord r = make_record(k, cur);
    const double d_log_vol = std::log(cur.vol / prev.vol);
    const double d_mean_r2 = cur.mean_r2 - prev.mean_r2;
    const double d_mean_r_sq = (cur.mean_r - prev.mean_r) * (cur.mean_r + prev.mean_r);
    r.rate_fd = (d_log_vol - d_mean_r2 / (60.0 * t2) + d_mean_r_sq / (72.0 * t2)) / dt;
    const double var = 0.5 * (cur.var + prev.var);
    const double grad = 0.5 * (cur.grad_term + prev.grad_term);
    r.rate_variance = var / (240.0 * t2);
    r.rate_corrected = var / (240.0 * t2) - grad / (60.0 * t2);
    trace.records.push_back(r);
    if ((opt.snapshot_stride > 0 && k % opt.snapshot_stride == 0) || k == steps) trace.snapshots.emplace_back(k, m);
    prev = cur;
  }
  return trace;
}

// -- perturbation decay -------------------------------------------------------

/// Sphere of revolution with conformal factor exp(2u), u = eps P2(cos x):
/// the curvature perturbation is 8 eps P2 to first order.
inline WarpedMetric2D perturbed_sphere(std::size_t n, double sigma_amplitude) {
  const double eps = sigma_amplitude / 8.0;
  auto u = [eps](double x) {
    const double c = std::cos(x);
    return eps * 0.5 * (3.0 * c * c - 1.0);
  };
  return make_sphere_metric(
      n, std::numbers::pi, [u](double x) { return std::exp(2.0 * u(x)); },
      [u](double x) { return std::exp(2.0 * u(x)) * std::sin(x) * std::sin(x); });
}

/// Torus band A = 1, B = (1 + eps cos x)^2 on period 2 pi.
inline WarpedMetric2D perturbed_torus(std::size_t n, double amplitude) {
  return make_torus_metric(
      n, 2.0 * std::numbers::pi, [](double) { return 1.0; },
      [amplitude](double x) { return std::pow(1.0 + amplitude * std::cos(x), 2); });
}

enum class DecayModel {
  metric_flow,    // integrate the normalized metric flow and measure R - <R>
  reduced_scalar  // integrate the closed-form scalar equation on the frozen initial metric
};

enum class DecayStatus { ok, no_perturbation };

struct DecayEstimate {
  DecayStatus status = DecayStatus::ok;
  double slope = 0.0;  // d ln max|sigma| / dt
  std::vector<double> times;
  std::vector<double> amplitudes;
};

struct DecayOptions {
  DecayModel model = DecayModel::metric_flow;
  double dt = 0.0;  // 0: use the stability bound
  double c_stab = 0.05;
  std::size_t sample_every = 100;
  double fit_from = 0.0;  // fit window start time
  double threshold = 1e-12;  // below this the perturbation counts as absent
};

namespace detail {

inline double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace detail

inline DecayEstimate perturbation_decay(const WarpedMetric2D& m0, double t_end, const DecayOptions& opt = {}) {
  DecayEstimate est;
  auto sigma_max = [](const WarpedMetric2D& m, const Field& r) {
    return (r.array() - manifold_mean(m, r)).abs().maxCoeff();
  };
  const Field r0 = scalar_curvature(m0);
  if (sigma_max(m0, r0) < opt.threshold) {
    est.status = DecayStatus::no_perturbation;
    return est;
  }
  // Half the initial bound leaves room for the curvature to grow.
  const double dt = opt.dt > 0.0 ? opt.dt : 0.5 * stable_step_bound(m0, opt.c_stab);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt));
  WarpedMetric2D m = m0;
  Field r = r0;
  auto record = [&](std::size_t k) {
    est.times.push_back(static_cast<double>(k) * dt);
    est.amplitudes.push_back(sigma_max(m, r));
  };
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    if (opt.model == DecayModel::metric_flow) {
      m = flow_step(m, FlowVariant::normalized, dt, {opt.c_stab});
      if (k % opt.sample_every == 0 || k == steps) {
        r = scalar_curvature(m);
        record(k);
      }
    } else {
      // RK4 on R with the metric frozen.
      auto rhs = [&](const Field& rr) {
        const Field rr2 = rr.cwiseProduct(rr);
        return Field((-0.25 * rr.array() * (rr2.array() - manifold_mean(m, rr2)) -
                      0.5 * gradient_norm2(m, rr).array())
                         .matrix());
      };
      const Field k1 = rhs(r);
      const Field k2 = rhs(r + 0.5 * dt * k1);
      const Field k3 = rhs(r + 0.5 * dt * k2);
      const Field k4 = rhs(r + dt * k3);
      r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (k % opt.sample_every == 0 || k == steps) record(k);
    }
  }
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < est.times.size(); ++i) {
    if (est.times[i] < opt.fit_from) continue;
    ts.push_back(est.times[i]);
    ys.push_back(std::log(est.amplitudes[i]));
  }
  est.slope = detail::fit_slope(ts, ys);
  return est;
}

// -- Perelman functional --------------------------------------------------------

/// F = integral of exp(-f) (R + |grad f|^2).
inline double perelman_F(const WarpedMetric2D& m, const Field& f) {
  const Field w = (-f.array()).exp().matrix();
  const Field integrand = (w.array() * (scalar_curvature(m).array() + gradient_norm2(m, f).array())).matrix();
  return integrate(m, integrand);
}

/// Integral of exp(-f) dV.
inline double weighted_measure(const WarpedMetric2D& m, const Field& f) {
  return integrate(m, (-f.array()).exp().matrix());
}

enum class PerelmanVariant {
  weighted,  // dg = -2 exp(-f) (Ric + Hess f) dt
  standard   // dg = -2 (Ric + Hess f) dt
};

struct PerelmanState {
  WarpedMetric2D metric;
  Field f;
};

/// RK4 in (ln A, ln B, f) with df/dt = (1/2) g^{ij} dg_ij/dt; since
/// f - (ln A + ln B)/2 is then a linear invariant, exp(-f) sqrt(g) is
/// conserved pointwise up to rounding.
inline PerelmanState perelman_flow_step(const PerelmanState& s, double dt, PerelmanVariant variant,
                                        const SurfaceStepOptions& opt = {}) {
  detail::check_step(s.metric, dt, opt.c_stab);
  struct Logs {
    Field la, lb, f;
  };
  auto rhs = [&](const Logs& y) {
    const WarpedMetric2D m = with_components(s.metric, y.la.array().exp().matrix(), y.lb.array().exp().matrix());
    const Field r = scalar_curvature(m);
    const DiagTensor hf = covariant_hessian(m, y.f);
    const Field w = variant == PerelmanVariant::weighted ? Field((-y.f.array()).exp().matrix())
                                                         : Field::Ones(y.f.size());
    Logs d;
    d.la = (-2.0 * w.array() * (0.5 * r.array() + hf.xx.array() / m.a().array())).matrix();
    d.lb = (-2.0 * w.array() * (0.5 * r.array() + hf.yy.array() / m.b().array())).matrix();
    d.f = 0.5 * (d.la + d.lb);
    return d;
  };
  auto axpy = [](const Logs& y, const Logs& k, double w) { return Logs{y.la + w * k.la, y.lb + w * k.lb, y.f + w * k.f}; };
  const Logs y0{s.metric.a().array().log().matrix(), s.metric.b().array().log().matrix(), s.f};
  const Logs k1 = rhs(y0);
  const Logs k2 = rhs(axpy(y0, k1, 0.5 * dt));
  const Logs k3 = rhs(axpy(y0, k2, 0.5 * dt));
  const Logs k4 = rhs(axpy(y0, k3, dt));
  auto combine = [&](const Field& y, const Field& a, const Field& b, const Field& c, const Field& d) {
    return Field(y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d));
  };
  const Field la = combine(y0.la, k1.la, k2.la, k3.la, k4.la);
  const Field lb = combine(y0.lb, k1.lb, k2.lb, k3.lb, k4.lb);
  const Field f = combine(y0.f, k1.f, k2.f, k3.f, k4.f);
  return {with_components(s.metric, la.array().exp().matrix(), lb.array().exp().matrix()), f};
}

// -- maximally symmetric reduction ------------------------------------------------

/// C(d) = 5/2 - 1/d + 2/(d(d-1)).
inline double maxsym_constant(int dim) {
  const double d = dim;
  return 2.5 - 1.0 / d + 2.0 / (d * (d - 1.0));
}

struct MaxSymState {
  int dim = 2;
  double r = 1.0;
  double t = 0.0;
};

/// d(r^2)/dt = [5 R^2 (1/d - 1/2) + C R^2 (2/d - 1/2)] r^2 with R = d(d-1)/r^2.
inline double maxsym_flow_rhs(const MaxSymState& s) {
  if (s.dim < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 2");
  if (!(s.r > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
  const double d = s.dim;
  const double u = s.r * s.r;
  const double curv = d * (d - 1.0) / u;
  const double c = maxsym_constant(s.dim);
  return (5.0 * curv * curv * (1.0 / d - 0.5) + c * curv * curv * (2.0 / d - 0.5)) * u;
}

struct MaxSymSample {
  double t = 0.0;
  double r = 0.0;
};

/// Dormand-Prince 5(4) with dense output on u = r^2, sampled at `times`
/// (ascending, starting at or after s0.t).
inline std::vector<MaxSymSample> maxsym_integrate(const MaxSymState& s0, const std::vector<double>& times,
                                                  double rtol = 1e-8) {
  namespace odeint = boost::numeric::odeint;
  if (times.empty() || !(times.back() > s0.t)) throw Error(ErrorCode::InvalidArgument, "t_end must exceed the start time");
  using State = std::vector<double>;
  auto rhs = [dim = s0.dim](const State& u, State& du, double) {
    if (!(u[0] > 0.0)) throw Error(ErrorCode::ToleranceFailure, "scale factor left the positive range");
    du[0] = maxsym_flow_rhs({dim, std::sqrt(u[0]), 0.0});
  };
  State u{s0.r * s0.r};
  std::vector<double> grid;
  grid.push_back(s0.t);
  for (double t : times)
    if (t > s0.t) grid.push_back(t);
  std::vector<MaxSymSample> out;
  for (double t : times)
    if (t <= s0.t) out.push_back({t, s0.r});
  // Internal tolerance two orders tighter than requested: global error
  // accumulates over the accepted steps.
  auto stepper = odeint::make_dense_output(1e-2 * rtol, 1e-2 * rtol, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, rhs, u, grid.begin(), grid.end(), 1e-3,
                            [&](const State& x, double t) {
                              if (t > s0.t) out.push_back({t, std::sqrt(x[0])});
                            },
                            odeint::max_step_checker(1'000'000));
  } catch (const odeint::step_adjustment_error& e) {
    throw Error(ErrorCode::ToleranceFailure, e.what());
  } catch (const odeint::no_progress_error& e) {
    throw Error(ErrorCode::ToleranceFailure, e.what());
  }
  return out;
}

// -- output ----------------------------------------------------------------------

inline void write_entropy_trace_csv(const EntropyFlowTrace& trace, const std::string& path) {
  CsvWriter out(path, {"step", "t", "vol", "meanR2", "S", "dSdt_fd", "dSdt_variance"});
  for (const auto& r : trace.records)
    out.row(static_cast<long long>(r.step), {r.t, r.vol, r.mean_r2, r.entropy, r.rate_fd, r.rate_variance});
}

inline void write_metric_csv(const WarpedMetric2D& m, const std::string& path, const Field* f = nullptr) {
  if (f) {
    CsvWriter out(path, {"x", "A", "B", "f"});
    for (Eigen::Index j = 0; j < m.a().size(); ++j) out.row({m.grid().nodes()[j], m.a()[j], m.b()[j], (*f)[j]});
  } else {
    CsvWriter out(path, {"x", "A", "B"});
    for (Eigen::Index j = 0; j < m.a().size(); ++j) out.row({m.grid().nodes()[j], m.a()[j], m.b()[j]});
  }
}

}  // namespace specflow::surface
