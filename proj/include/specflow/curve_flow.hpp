#pragma once

// Curve-shortening and area-preserving (Gage) flows of closed plane curves,
// with the microcanonical surface-entropy trace.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specflow/core/csv.hpp"
#include "specflow/core/error.hpp"
#include "specflow/ensembles.hpp"
#include "specflow/plane_curve.hpp"

namespace specflow::curve {

enum class VelocityRule { csf, gage };

inline const char* to_string(VelocityRule r) { return r == VelocityRule::csf ? "csf" : "gage"; }

/// Mean curvature subtracted by the Gage flow.
enum class GageMean {
  discrete,           // sum(kappa w) / sum(w): exact fixed point and exact area rate for the polygon
  turning_over_length  // 2 pi / L
};

/// v_i = -kappa_i N_i.
inline std::vector<Vec2> csf_velocity(std::span<const Vec2> p) {
  const auto geo = vertex_geometry(p);
  std::vector<Vec2> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = geo[i].normal * (-geo[i].kappa);
  return v;
}

/// v_i = -(kappa_i - mean) N_i.
inline std::vector<Vec2> gage_velocity(std::span<const Vec2> p, GageMean mean = GageMean::discrete) {
  const auto geo = vertex_geometry(p);
  double target = 0.0;
  if (mean == GageMean::discrete) {
    double num = 0.0, den = 0.0;
    for (const auto& g : geo) {
      num += g.kappa * g.weight;
      den += g.weight;
    }
    target = num / den;
  } else {
    target = 2.0 * std::numbers::pi / polygon_length(p);
  }
  std::vector<Vec2> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = geo[i].normal * (target - geo[i].kappa);
  return v;
}

inline std::vector<Vec2> csf_velocity(const PlaneCurve& c) { return csf_velocity(c.vertices()); }
inline std::vector<Vec2> gage_velocity(const PlaneCurve& c, GageMean mean = GageMean::discrete) {
  return gage_velocity(c.vertices(), mean);
}

inline std::vector<Vec2> velocity(std::span<const Vec2> p, VelocityRule rule, GageMean mean) {
  return rule == VelocityRule::csf ? csf_velocity(p) : gage_velocity(p, mean);
}

struct StepOptions {
  double c_stab = 0.45;  // dt <= c_stab * h_min^2; RK2 on the discrete Laplacian is stable to 0.5
  bool resample = true;
  bool check_simple = true;
  GageMean mean = GageMean::discrete;
};

inline double stable_step_bound(std::span<const Vec2> p, double c_stab) {
  const double h = min_segment_length(p);
  return c_stab * h * h;
}

/// One RK2 (midpoint) step, optionally resampled to uniform arclength.
inline PlaneCurve flow_step(const PlaneCurve& c, VelocityRule rule, double dt, const StepOptions& opt = {}) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  const auto p = c.vertices();
  const double bound = stable_step_bound(p, opt.c_stab);
  if (dt > bound)
    throw Error(ErrorCode::StepTooLarge,
                "dt " + format_double(dt) + " exceeds the stability bound " + format_double(bound));
  const std::size_t n = p.size();
  const auto v1 = velocity(p, rule, opt.mean);
  std::vector<Vec2> mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = p[i] + v1[i] * (0.5 * dt);
  const auto v2 = velocity(mid, rule, opt.mean);
  std::vector<Vec2> next(n);
  for (std::size_t i = 0; i < n; ++i) next[i] = p[i] + v2[i] * dt;
  if (opt.check_simple && !is_simple(next))
    throw Error(ErrorCode::SelfIntersectionDuringFlow, "curve self-intersects after the step");
  if (signed_area(next) <= 0.0) throw Error(ErrorCode::SelfIntersectionDuringFlow, "curve orientation flipped");
  if (opt.resample) next = resample_points(next, n);
  return make_closed_curve_unchecked(std::move(next));
}

struct CurveFlowRecord {
  std::size_t step = 0;
  double t = 0.0;
  double length = 0.0;
  double area = 0.0;
  double entropy = 0.0;  // S_surf
  double iso = 0.0;
};

struct CurveFlowTrace {
  std::vector<CurveFlowRecord> records;
  std::vector<std::pair<std::size_t, std::vector<Vec2>>> snapshots;
  std::optional<Error> halted;  // set when the run stopped on an error
};

struct RunOptions {
  std::size_t resample_every = 10;
  std::size_t snapshot_stride = 0;  // 0: first and last only
  double c_stab = 0.45;
  GageMean mean = GageMean::discrete;
  ens::OmegaConvention omega = ens::OmegaConvention::sphere_area;
  bool initial_resample = true;  // start from uniform arclength spacing
};

inline CurveFlowRecord measure(const PlaneCurve& c, std::size_t step, double t, double energy,
                               ens::OmegaConvention omega) {
  CurveFlowRecord r;
  r.step = step;
  r.t = t;
  r.length = length(c);
  r.area = enclosed_area(c);
  r.entropy = ens::surface_entropy_expansion(2, energy, r.area, r.length, omega);
  r.iso = r.length * r.length / (4.0 * std::numbers::pi * r.area);
  return r;
}

/// Integrates to t_end with fixed dt; resampling and the self-intersection
/// guard run every `resample_every` steps. Errors end the run and are kept
/// in the trace alongside the records accepted so far.
inline CurveFlowTrace run_curve_flow(const PlaneCurve& initial, VelocityRule rule, double t_end, double dt,
                                     double energy = 1e4, const RunOptions& opt = {}) {
  if (!(energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy scale must be positive");
  if (!(t_end > 0.0 && dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end and dt must be positive");
  CurveFlowTrace trace;
  PlaneCurve c = opt.initial_resample ? resample_arclength(initial, initial.size()) : initial;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  trace.records.push_back(measure(c, 0, 0.0, energy, opt.omega));
  trace.snapshots.emplace_back(0, std::vector<Vec2>(c.vertices().begin(), c.vertices().end()));
  const std::size_t every = std::max<std::size_t>(opt.resample_every, 1);
  for (std::size_t k = 1; k <= steps; ++k) {
    StepOptions so;
    so.c_stab = opt.c_stab;
    so.mean = opt.mean;
    so.resample = (k % every == 0);
    so.check_simple = so.resample;
    try {
      c = flow_step(c, rule, dt, so);
    } catch (const Error& e) {
      trace.halted = e;
      break;
    }
    const double t = static_cast<double>(k) * dt;
    trace.records.push_back(measure(c, k, t, energy, opt.omega));
    if ((opt.snapshot_stride > 0 && k % opt.snapshot_stride == 0) || k == steps)
      trace.snapshots.emplace_back(k, std::vector<Vec2>(c.vertices().begin(), c.vertices().end()));
  }
  return trace;
}

inline void write_curve_trace_csv(const CurveFlowTrace& trace, const std::string& path) {
  CsvWriter out(path, {"step", "t", "length", "area", "entropy", "iso"});
  for (const auto& r : trace.records)
    out.row(static_cast<long long>(r.step), {r.t, r.length, r.area, r.entropy, r.iso});
}

inline void write_curve_csv(std::span<const Vec2> p, const std::string& path) {
  CsvWriter out(path, {"x", "y"});
  for (const auto& v : p) out.row({v.x, v.y});
}

}  // namespace specflow::curve
