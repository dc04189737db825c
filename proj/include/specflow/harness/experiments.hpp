#pragma once

// Experiment registry: each entry declares its parameter schema and runs
// against a resolved config, writing traces and returning checked results.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "specflow/asymptotics.hpp"
#include "specflow/core/random.hpp"
#include "specflow/curve_flow.hpp"
#include "specflow/ensembles.hpp"
#include "specflow/harness/config.hpp"
#include "specflow/harness/report.hpp"
#include "specflow/harness/svg.hpp"
#include "specflow/hypersurface_flow.hpp"
#include "specflow/plane_curve.hpp"
#include "specflow/spectrum/bessel.hpp"
#include "specflow/spectrum/fd_laplacian.hpp"
#include "specflow/spectrum/spectrum.hpp"
#include "specflow/surface_flow.hpp"

namespace specflow::harness {

struct Experiment {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> schema;
  std::function<void(const ExperimentConfig&, Output&, Report&)> run;
};

namespace exp {

using spectral::Spectrum;

inline std::string zero_padded(std::size_t v, int width = 6) {
  std::string s = std::to_string(v);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

/// Analytic spectrum of a named planar domain together with its area and perimeter.
struct PlanarDomain {
  Spectrum spectrum;
  double area;
  double perimeter;
  double first_exact;
  bool polygon;
};

inline PlanarDomain analytic_domain(const ExperimentConfig& cfg, double cutoff) {
  const std::string& domain = cfg.text("domain");
  const double a = cfg.real("a");
  const double b = domain == "square" ? a : cfg.real("b");
  if (domain == "disk") {
    const double r = cfg.real("radius");
    const double j = spectral::bessel_j_zero(0, 1);
    return {spectral::disk_spectrum(r, cutoff), std::numbers::pi * r * r, 2.0 * std::numbers::pi * r, j * j / (r * r),
            false};
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return {spectral::rectangle_spectrum(a, b, cutoff), a * b, 2.0 * (a + b), pi2 * (1.0 / (a * a) + 1.0 / (b * b)), true};
}

inline Series staircase(const Spectrum& s, std::size_t max_points = 4000) {
  Series out{"N(E)", {}, {}, false};
  const auto ev = s.eigenvalues();
  const std::size_t stride = std::max<std::size_t>(1, 2 * ev.size() / max_points);
  for (std::size_t i = 0; i < ev.size(); i += stride) {
    out.x.push_back(ev[i]);
    out.y.push_back(static_cast<double>(i));
    out.x.push_back(ev[i]);
    out.y.push_back(static_cast<double>(i + 1));
  }
  return out;
}

inline Series weyl_series(const asym::WeylModel& m, double e_max) {
  Series out{"two-term Weyl", {}, {}, true};
  for (int i = 1; i <= 200; ++i) {
    const double e = e_max * i / 200.0;
    out.x.push_back(e);
    out.y.push_back(std::max(0.0, asym::weyl_two_term(m, e)));
  }
  return out;
}

// -- spectrum -------------------------------------------------------------------------

inline void run_spectrum(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const std::string& domain = cfg.text("domain");
  Spectrum s = Spectrum::make({1.0}, 1.0, spectral::SpectrumSource::explicit_list);
  double first_exact = 0.0, area = 0.0, perimeter = 0.0;
  double tolerance = 1e-10;
  if (domain == "fd-square" || domain == "fd-disk") {
    spectral::FdOptions opt;
    opt.lanczos.seed = derive_seed(cfg.seed, "lanczos");
    const double h = cfg.real("h");
    if (domain == "fd-square") {
      const double side = cfg.real("a");
      const auto cells = static_cast<std::size_t>(std::llround(side / h));
      s = spectral::fd_dirichlet_spectrum(spectral::DomainMask::square(side, cells), cfg.count("k"), opt);
      first_exact = 2.0 * std::numbers::pi * std::numbers::pi / (side * side);
      area = side * side;
      perimeter = 4.0 * side;
    } else {
      const double r = cfg.real("radius");
      s = spectral::fd_dirichlet_spectrum(spectral::DomainMask::disk(r, h), cfg.count("k"), opt);
      const double j = spectral::bessel_j_zero(0, 1);
      first_exact = j * j / (r * r);
      area = std::numbers::pi * r * r;
      perimeter = 2.0 * std::numbers::pi * r;
    }
    tolerance = cfg.real("fd_tolerance");
  } else {
    auto d = analytic_domain(cfg, cfg.real("cutoff"));
    s = std::move(d.spectrum);
    first_exact = d.first_exact;
    area = d.area;
    perimeter = d.perimeter;
  }
  if (s.size() == 0) throw Error(ErrorCode::EmptyWindow, "no eigenvalues below the cutoff");
  rep.checks.push_back(Check::relative("lowest_eigenvalue", s[0], first_exact, tolerance));
  rep.metrics["count"] = s.size();
  rep.metrics["lowest"] = s[0];
  rep.metrics["lowest_exact"] = first_exact;
  rep.metrics["complete_up_to"] = s.complete_up_to();
  rep.metrics["source"] = spectral::to_string(s.source());
  if (out.csv()) spectral::write_spectrum_csv(s, out.file("spectrum.csv"));
  if (out.svg())
    write_svg_plot({"Counting function", "E", "N(E)",
                    {staircase(s), weyl_series({2, area, perimeter}, s.eigenvalues().back())}},
                   out.file("counting.svg"));
}

// -- weyl-fit -------------------------------------------------------------------------

inline void run_weyl_fit(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto d = analytic_domain(cfg, cfg.real("cutoff"));
  const auto fit = asym::weyl_fit(d.spectrum, cfg.real("e_min"), cfg.real("e_max"));
  rep.checks.push_back(Check::relative("vol_est", fit.vol_est, d.area, cfg.real("vol_tolerance")));
  rep.checks.push_back(Check::relative("bvol_est", fit.bvol_est, d.perimeter, cfg.real("bvol_tolerance")));
  rep.metrics["vol_est"] = fit.vol_est;
  rep.metrics["bvol_est"] = fit.bvol_est;
  rep.metrics["residual"] = fit.residual;
  rep.metrics["eigenvalues_in_window"] = fit.eigenvalues_in_window;
  if (out.json()) {
    nlohmann::ordered_json j{{"vol_est", fit.vol_est},
                             {"bvol_est", fit.bvol_est},
                             {"const_term", nullptr},
                             {"residual", fit.residual},
                             {"window", {fit.e_min, fit.e_max}},
                             {"coefficient_set", nullptr}};
    write_json(j, out.file("fit.json"));
  }
  if (out.csv()) spectral::write_spectrum_csv(d.spectrum, out.file("spectrum.csv"));
  if (out.svg())
    write_svg_plot({"Counting function and fitted Weyl law", "E", "N(E)",
                    {staircase(d.spectrum), weyl_series({2, fit.vol_est, fit.bvol_est}, cfg.real("e_max"))}},
                   out.file("counting.svg"));
}

// -- heat-trace -----------------------------------------------------------------------

inline void run_heat_trace(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto d = analytic_domain(cfg, cfg.real("cutoff"));
  const auto temps = cfg.reals("temperatures");
  std::optional<std::pair<double, double>> pinned;
  if (cfg.flag("pinned")) pinned = std::make_pair(d.area, d.perimeter);
  const auto fit = asym::heat_trace_constant_extract(d.spectrum, temps, pinned);
  const auto boundary_h = asym::flat_domain_model(d.area, d.perimeter, 1.0, asym::CoefficientSet::boundary_h);
  const auto classical = asym::flat_domain_model(d.area, d.perimeter, 1.0, asym::CoefficientSet::classical);
  // Constant terms of the models: the T^0 coefficient.
  const double c_boundary_h = asym::heat_trace_model(boundary_h, 1.0) - d.area / (4.0 * std::numbers::pi) +
                         d.perimeter / (8.0 * std::sqrt(std::numbers::pi));
  const double c_classical = asym::heat_trace_model(classical, 1.0) - d.area / (4.0 * std::numbers::pi) +
                             d.perimeter / (8.0 * std::sqrt(std::numbers::pi));
  // Right-angle corners contribute 1/16 each for polygons.
  const double reference = d.polygon ? 0.25 : c_classical;
  rep.checks.push_back(Check::relative("constant_term", fit.const_term, reference, cfg.real("tolerance")));
  const bool classical_closer = std::abs(fit.const_term - c_classical) < std::abs(fit.const_term - c_boundary_h);
  rep.metrics["const_term"] = fit.const_term;
  rep.metrics["reference"] = reference;
  rep.metrics["boundary_h_constant"] = c_boundary_h;
  rep.metrics["classical_constant"] = c_classical;
  rep.metrics["closer_coefficient_set"] = classical_closer ? "classical" : "boundary-h";
  rep.metrics["fit_residual"] = fit.residual;

  std::vector<double> zs, tails, reduced;
  for (double t : temps) {
    const auto z = asym::partition_function_from_spectrum(d.spectrum, t);
    zs.push_back(z.value);
    tails.push_back(z.tail_bound);
    reduced.push_back(z.value - fit.linear * t - fit.sqrt_term * std::sqrt(t));
  }
  if (out.csv()) {
    CsvWriter w(out.file("heat_trace.csv"), {"T", "Z", "tail", "Z_boundary_h", "Z_classical"});
    for (std::size_t i = 0; i < temps.size(); ++i)
      w.row({temps[i], zs[i], tails[i], asym::heat_trace_model(boundary_h, temps[i]),
             asym::heat_trace_model(classical, temps[i])});
  }
  if (out.json()) {
    nlohmann::ordered_json j{{"vol_est", d.area},
                             {"bvol_est", d.perimeter},
                             {"const_term", fit.const_term},
                             {"residual", fit.residual},
                             {"window", {temps.front(), temps.back()}},
                             {"coefficient_set", classical_closer ? "classical" : "boundary-h"}};
    write_json(j, out.file("fit.json"));
  }
  if (out.svg()) {
    Series meas{"Z - aT - b sqrt(T)", temps, reduced, false};
    Series cp{"boundary-H constant", {temps.front(), temps.back()}, {c_boundary_h, c_boundary_h}, true};
    Series cc{"classical constant", {temps.front(), temps.back()}, {c_classical, c_classical}, true};
    write_svg_plot({"Heat-trace constant term", "T", "constant", {meas, cp, cc}}, out.file("heat_trace.svg"));
  }
}

// -- entropy --------------------------------------------------------------------------

inline void run_entropy(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const std::string& source = cfg.text("source");
  const auto temps = cfg.reals("temperatures");
  std::vector<ens::ThermoState> states;
  double identity = 0.0;
  auto record_identity = [&](const ens::ThermoState& st) {
    identity = std::max(identity, std::abs(st.entropy - (st.energy / st.temperature + st.log_z)) /
                                      std::max(1.0, std::abs(st.entropy)));
  };
  std::optional<Spectrum> spectrum;
  if (source == "disk" || source == "square") {
    const double cutoff = cfg.real("cutoff");
    if (source == "disk") {
      const double r = cfg.real("radius");
      spectrum = spectral::disk_spectrum(r, cutoff);
    } else {
      const double a = cfg.real("a");
      spectrum = spectral::rectangle_spectrum(a, a, cutoff);
    }
    const ens::SpectrumPartition src{&*spectrum};
    for (double t : temps) states.push_back(ens::thermo_state(src, t));
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < states.size(); ++i) min_step = std::min(min_step, states[i].entropy - states[i - 1].entropy);
    if (states.size() > 1) rep.checks.push_back(Check::at_least("entropy_nondecreasing_in_T", min_step, 0.0));
    if (source == "disk") {
      const double r = cfg.real("radius");
      const ens::HeatTracePartition model{asym::flat_domain_model(std::numbers::pi * r * r, 2.0 * std::numbers::pi * r, 1.0,
                                                                  asym::CoefficientSet::classical)};
      double worst = 0.0;
      for (const auto& st : states)
        worst = std::max(worst, std::abs(st.entropy - ens::gibbs_entropy(model, st.temperature)) / std::abs(st.entropy));
      rep.checks.push_back(Check::at_most("spectrum_vs_classical_model", worst, cfg.real("model_tolerance")));
    }
  } else if (source == "torus-model") {
    const ens::HeatTracePartition src{asym::flat_torus_model(cfg.real("area"))};
    double worst = 0.0;
    for (double t : temps) {
      const auto st = ens::thermo_state(src, t, {ens::Differentiation::analytic});
      const auto fd = ens::thermo_state(src, t, {ens::Differentiation::finite_difference});
      worst = std::max(worst, std::abs(st.entropy - fd.entropy) / std::abs(st.entropy));
      const double exact = std::log(t * cfg.real("area") / (4.0 * std::numbers::pi)) + 1.0;
      worst = std::max(worst, std::abs(st.entropy - exact) / std::abs(exact));
      states.push_back(st);
      record_identity(fd);
    }
    rep.checks.push_back(Check::at_most("analytic_vs_finite_difference", worst, 1e-8));
  } else {
    const double gamma = cfg.real("gamma");
    spectrum = Spectrum::make({gamma}, gamma, spectral::SpectrumSource::explicit_list);
    const ens::SpectrumPartition src{&*spectrum};
    double worst = 0.0;
    for (double t : temps) {
      const auto st = ens::thermo_state(src, t);
      worst = std::max(worst, std::abs(st.energy - gamma) / gamma);
      states.push_back(st);
    }
    rep.checks.push_back(Check::at_most("single_level_energy", worst, 1e-8));
  }
  for (const auto& st : states) record_identity(st);
  rep.checks.push_back(Check::at_most("thermodynamic_identity", identity, 1e-8));
  if (out.csv()) {
    CsvWriter w(out.file("entropy.csv"), {"t", "T", "S", "U", "lnZ"});
    for (std::size_t i = 0; i < states.size(); ++i)
      w.row(static_cast<long long>(i), {states[i].temperature, states[i].entropy, states[i].energy, states[i].log_z});
  }
  if (out.svg()) {
    Series s{"S_Gibbs", {}, {}, false};
    for (const auto& st : states) {
      s.x.push_back(st.temperature);
      s.y.push_back(st.entropy);
    }
    write_svg_plot({"Gibbs entropy", "T", "S", {s}}, out.file("entropy.svg"));
  }
}

// -- flow-curve -----------------------------------------------------------------------

inline void run_flow_curve(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const std::string& source = cfg.text("curve");
  curve::PlaneCurve c = source == "ellipse"
                            ? curve::make_closed_curve(curve::ellipse_points(cfg.count("n"), cfg.real("a"), cfg.real("b")))
                            : curve::load_curve_csv(source);
  if (cfg.count("n") != c.size()) c = curve::resample_arclength(c, cfg.count("n"));
  const auto rule = cfg.text("rule") == "gage" ? curve::VelocityRule::gage : curve::VelocityRule::csf;
  curve::RunOptions opt;
  opt.resample_every = cfg.count("resample_every");
  opt.snapshot_stride = cfg.count("snapshot_stride");
  opt.c_stab = cfg.real("c_stab");
  opt.omega = cfg.text("omega") == "unit-ball" ? ens::OmegaConvention::unit_ball : ens::OmegaConvention::sphere_area;
  const auto trace = curve::run_curve_flow(c, rule, cfg.real("t_end"), cfg.real("dt"), cfg.real("energy"), opt);
  if (trace.halted) throw *trace.halted;
  const auto& recs = trace.records;
  double max_dl = -std::numeric_limits<double>::infinity(), min_ds = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < recs.size(); ++i) {
    max_dl = std::max(max_dl, recs[i].length - recs[i - 1].length);
    min_ds = std::min(min_ds, recs[i].entropy - recs[i - 1].entropy);
  }
  rep.checks.push_back(Check::at_most("length_nonincreasing", max_dl, 1e-9));
  if (rule == curve::VelocityRule::gage) {
    rep.checks.push_back(Check::at_least("entropy_nondecreasing", min_ds, 0.0));
    rep.checks.push_back(
        Check::at_most("area_drift", std::abs(recs.back().area - recs.front().area) / recs.front().area, cfg.real("area_tolerance")));
    rep.checks.push_back(Check::at_most("final_isoperimetric_ratio", recs.back().iso, cfg.real("iso_target")));
  } else {
    // CSF: dA/dt = -2 pi for any simple closed curve.
    const double rate = (recs.back().area - recs.front().area) / recs.back().t;
    rep.checks.push_back(Check::relative("area_rate", rate, -2.0 * std::numbers::pi, cfg.real("area_tolerance")));
  }
  rep.metrics["steps"] = recs.size() - 1;
  rep.metrics["final_iso"] = recs.back().iso;
  rep.metrics["final_length"] = recs.back().length;
  rep.metrics["final_area"] = recs.back().area;
  if (out.csv()) {
    curve::write_curve_trace_csv(trace, out.file("trace.csv"));
    curve::write_curve_csv(trace.snapshots.back().second, out.file("final_curve.csv"));
    for (const auto& [step, pts] : trace.snapshots)
      curve::write_curve_csv(pts, out.file("snapshots/curve_" + zero_padded(step) + ".csv"));
  }
  if (out.svg()) {
    Series s{"S_surf", {}, {}, false}, a{"area", {}, {}, false}, l{"length", {}, {}, true};
    const std::size_t stride = std::max<std::size_t>(1, recs.size() / 2000);
    for (std::size_t i = 0; i < recs.size(); i += stride) {
      s.x.push_back(recs[i].t);
      s.y.push_back(recs[i].entropy);
      a.x.push_back(recs[i].t);
      a.y.push_back(recs[i].area);
      l.x.push_back(recs[i].t);
      l.y.push_back(recs[i].length);
    }
    write_svg_plot({"Surface entropy along the flow", "t", "S_surf", {s}}, out.file("entropy.svg"));
    write_svg_plot({"Area and length", "t", "value", {a, l}}, out.file("area.svg"));
  }
}

// -- flow-surface ---------------------------------------------------------------------

inline surface::WarpedMetric2D initial_surface(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.count("n");
  const double amp = cfg.real("amplitude");
  return cfg.text("topology") == "torus" ? surface::perturbed_torus(n, amp) : surface::perturbed_sphere(n, amp);
}

inline void run_surface_entropy(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto m0 = initial_surface(cfg);
  const double c_stab = cfg.real("c_stab");
  const double dt = cfg.real("dt") > 0.0 ? cfg.real("dt") : 0.9 * surface::stable_step_bound(m0, c_stab);
  surface::EntropyRunOptions opt;
  opt.temperature = cfg.real("temperature");
  opt.c_stab = c_stab;
  opt.snapshot_stride = cfg.count("snapshot_stride");
  const auto variant = cfg.text("variant") == "normalized" ? surface::FlowVariant::normalized : surface::FlowVariant::unnormalized;
  const auto trace = surface::run_entropy_flow(m0, variant, cfg.count("steps"), dt, opt);
  if (trace.halted) throw *trace.halted;
  const auto& recs = trace.records;
  double trace_max = 0.0, min_rate = std::numeric_limits<double>::infinity(), gb = 0.0, pred = 0.0, corr = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    trace_max = std::max(trace_max, std::abs(recs[i].trace_integral));
    gb = std::max(gb, std::abs(recs[i].gauss_bonnet_defect));
    if (i == 0) continue;
    min_rate = std::min(min_rate, recs[i].rate_fd);
    pred += recs[i].rate_variance;
    corr += recs[i].rate_corrected;
  }
  const double steps = static_cast<double>(recs.size() - 1);
  pred /= steps;
  corr /= steps;
  // Whole-run rate from term-wise differences of the entropy expansion.
  const double t2 = opt.temperature * opt.temperature;
  const auto& a = recs.front();
  const auto& b = recs.back();
  const double fd = (std::log(b.vol / a.vol) - (b.mean_r2 - a.mean_r2) / (60.0 * t2) +
                     (b.mean_r * b.mean_r - a.mean_r * a.mean_r) / (72.0 * t2)) / b.t;
  const double vol_drift = std::abs(b.vol - a.vol) / a.vol;
  if (variant == surface::FlowVariant::normalized) {
    rep.checks.push_back(Check::at_most("volume_drift", vol_drift, 1e-6));
    rep.checks.push_back(Check::at_most("trace_integral", trace_max, 1e-8));
    rep.checks.push_back(Check::at_least("entropy_rate_min", min_rate, -1e-9));
    rep.checks.push_back(Check::at_most("variance_rate_mismatch", std::abs(pred - fd) / std::abs(fd), cfg.real("mismatch_tolerance")));
    rep.checks.push_back(Check::at_most("corrected_rate_mismatch", std::abs(corr - fd) / std::abs(fd), cfg.real("mismatch_tolerance")));
  }
  rep.checks.push_back(Check::at_most("gauss_bonnet_defect", gb, 1e-3));
  rep.metrics["dt"] = dt;
  rep.metrics["rate_fd"] = fd;
  rep.metrics["rate_variance"] = pred;
  rep.metrics["rate_corrected"] = corr;
  rep.metrics["volume_drift"] = vol_drift;
  if (out.csv()) {
    surface::write_entropy_trace_csv(trace, out.file("trace.csv"));
    for (const auto& [step, m] : trace.snapshots) surface::write_metric_csv(m, out.file("snapshots/metric_" + zero_padded(step) + ".csv"));
  }
  if (out.svg()) {
    Series s{"S_Gibbs - S(0)", {}, {}, false}, v{"Vol", {}, {}, false};
    for (const auto& r : recs) {
      s.x.push_back(r.t);
      s.y.push_back(r.entropy - a.entropy);
      v.x.push_back(r.t);
      v.y.push_back(r.vol);
    }
    write_svg_plot({"Gibbs entropy along the flow", "t", "S - S(0)", {s}}, out.file("entropy.svg"));
    write_svg_plot({"Volume", "t", "Vol", {v}}, out.file("volume.svg"));
  }
}

inline void run_surface_decay(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto m0 = initial_surface(cfg);
  surface::DecayOptions opt;
  opt.c_stab = cfg.real("c_stab");
  opt.dt = cfg.real("dt");
  opt.sample_every = cfg.count("sample_every");
  const double t_end = cfg.real("t_end");
  const auto est = surface::perturbation_decay(m0, t_end, opt);
  if (est.status == surface::DecayStatus::no_perturbation) {
    rep.metrics["status"] = "no-perturbation";
    return;
  }
  opt.model = surface::DecayModel::reduced_scalar;
  const auto reduced = surface::perturbation_decay(m0, t_end, opt);
  const double mean_r = surface::manifold_mean(m0, surface::scalar_curvature(m0));
  const double target = -0.5 * mean_r * mean_r;
  rep.checks.push_back(Check::relative("decay_rate", est.slope, target, cfg.real("decay_tolerance")));
  rep.metrics["slope"] = est.slope;
  rep.metrics["slope_reduced_scalar"] = reduced.slope;
  rep.metrics["target"] = target;
  if (out.csv()) {
    CsvWriter w(out.file("decay.csv"), {"t", "sigma_max", "sigma_max_reduced"});
    for (std::size_t i = 0; i < est.times.size(); ++i)
      w.row({est.times[i], est.amplitudes[i], i < reduced.amplitudes.size() ? reduced.amplitudes[i] : std::nan("")});
  }
  if (out.svg()) {
    Series s{"metric flow", est.times, {}, false}, r{"reduced scalar", reduced.times, {}, true};
    for (double v : est.amplitudes) s.y.push_back(std::log(v));
    for (double v : reduced.amplitudes) r.y.push_back(std::log(v));
    write_svg_plot({"Curvature perturbation", "t", "ln max|R - <R>|", {s, r}}, out.file("decay.svg"));
  }
}

inline void run_surface_perelman(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto m0 = initial_surface(cfg);
  const double fa = cfg.real("f_amplitude");
  const surface::Field& x = m0.grid().nodes();
  surface::Field f(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) f[i] = fa * std::cos(x[i]) + 0.5 * fa * std::sin(2.0 * x[i]);
  surface::PerelmanState st{m0, f};
  const double c_stab = cfg.real("c_stab");
  const double dt = cfg.real("dt") > 0.0 ? cfg.real("dt") : 0.9 * surface::stable_step_bound(m0, c_stab);
  const auto variant = cfg.text("perelman_variant") == "weighted" ? surface::PerelmanVariant::weighted : surface::PerelmanVariant::standard;
  std::vector<double> ts{0.0}, fs{surface::perelman_F(st.metric, st.f)}, ms{surface::weighted_measure(st.metric, st.f)};
  for (std::size_t k = 1; k <= cfg.count("steps"); ++k) {
    st = surface::perelman_flow_step(st, dt, variant, {c_stab});
    ts.push_back(static_cast<double>(k) * dt);
    fs.push_back(surface::perelman_F(st.metric, st.f));
    ms.push_back(surface::weighted_measure(st.metric, st.f));
  }
  double min_df = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < fs.size(); ++i) min_df = std::min(min_df, fs[i] - fs[i - 1]);
  rep.checks.push_back(Check::at_least("F_nondecreasing", min_df, 0.0));
  rep.checks.push_back(Check::at_most("measure_drift", std::abs(ms.back() - ms.front()) / ms.front(), 1e-6));
  rep.metrics["F_initial"] = fs.front();
  rep.metrics["F_final"] = fs.back();
  rep.metrics["dt"] = dt;
  if (out.csv()) {
    CsvWriter w(out.file("perelman.csv"), {"step", "t", "F", "measure"});
    for (std::size_t i = 0; i < fs.size(); ++i) w.row(static_cast<long long>(i), {ts[i], fs[i], ms[i]});
    surface::write_metric_csv(st.metric, out.file("metric_final.csv"), &st.f);
  }
  if (out.svg()) write_svg_plot({"Perelman F", "t", "F", {{"F", ts, fs, false}}}, out.file("perelman.svg"));
}

inline void run_flow_surface(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const std::string& mode = cfg.text("mode");
  if (mode == "entropy") run_surface_entropy(cfg, out, rep);
  else if (mode == "decay") run_surface_decay(cfg, out, rep);
  else run_surface_perelman(cfg, out, rep);
}

// -- flow-mcf -------------------------------------------------------------------------

inline void run_flow_mcf(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto s0 = hyper::spheroid_profile(cfg.count("n"), cfg.real("polar"), cfg.real("equatorial"));
  const double c_stab = cfg.real("c_stab");
  const double dt = cfg.real("dt") > 0.0 ? cfg.real("dt") : 0.8 * hyper::stable_step_bound(s0, c_stab);
  hyper::VpmcfOptions opt;
  opt.tolerance = cfg.real("tolerance");
  opt.c_stab = c_stab;
  opt.temperature = cfg.real("temperature");
  opt.snapshot_stride = cfg.count("snapshot_stride");
  const auto trace = hyper::run_vpmcf(s0, cfg.real("t_end"), dt, opt);
  if (trace.halted) throw *trace.halted;
  const auto& recs = trace.records;
  double max_da = -std::numeric_limits<double>::infinity(), max_n = 0.0, min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    max_n = std::max(max_n, std::abs(recs[i].lapse_integral));
    min_rate = std::min(min_rate, recs[i].entropy_rate);
    if (i > 0) max_da = std::max(max_da, recs[i].area - recs[i - 1].area);
  }
  const double v0 = recs.front().volume;
  const double target_r = std::cbrt(3.0 * v0 / (4.0 * std::numbers::pi));
  const auto& final = trace.snapshots.back().second;
  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
  // Centre on the axis midway between the poles.
  const double zc = 0.5 * (final.nodes().front().y + final.nodes().back().y);
  for (const auto& p : final.nodes()) {
    const double r = std::hypot(p.x, p.y - zc);
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
  }
  rep.checks.push_back(Check::at_least("converged", trace.converged ? 1.0 : 0.0, 1.0));
  rep.checks.push_back(Check::at_most("radius_error",
                                      std::max(std::abs(r_min - target_r), std::abs(r_max - target_r)) / target_r, 0.01));
  rep.checks.push_back(Check::at_most("volume_drift", std::abs(recs.back().volume - v0) / v0, 0.005));
  if (recs.size() > 1) rep.checks.push_back(Check::at_most("area_nonincreasing", max_da, 1e-9));
  rep.checks.push_back(Check::at_most("lapse_integral", max_n, 1e-10));
  rep.checks.push_back(Check::at_least("entropy_rate_nonnegative", min_rate, 0.0));
  rep.metrics["dt"] = dt;
  rep.metrics["final_t"] = recs.back().t;
  rep.metrics["radius_min"] = r_min;
  rep.metrics["radius_max"] = r_max;
  rep.metrics["target_radius"] = target_r;
  if (out.csv()) {
    hyper::write_vpmcf_trace_csv(trace, out.file("trace.csv"));
    for (const auto& [step, s] : trace.snapshots) hyper::write_profile_csv(s, out.file("snapshots/profile_" + zero_padded(step) + ".csv"));
  }
  if (out.svg()) {
    Series a{"area", {}, {}, false}, e{"entropy rate", {}, {}, false};
    const std::size_t stride = std::max<std::size_t>(1, recs.size() / 2000);
    for (std::size_t i = 0; i < recs.size(); i += stride) {
      a.x.push_back(recs[i].t);
      a.y.push_back(recs[i].area);
      e.x.push_back(recs[i].t);
      e.y.push_back(recs[i].entropy_rate);
    }
    write_svg_plot({"Boundary area", "t", "area", {a}}, out.file("area.svg"));
    write_svg_plot({"Leading entropy rate", "t", "dS/dt", {e}}, out.file("entropy.svg"));
  }
}

// -- flow-maxsym ----------------------------------------------------------------------

/// Exact scale factor: with u = r^2, du/dt = K/u, so r^4 = r0^4 + 2 K t.
inline double maxsym_exact(int dim, double r0, double t) {
  const double d = dim;
  const double c = surface::maxsym_constant(dim);
  const double k = d * d * (d - 1.0) * (d - 1.0) * (5.0 * (1.0 / d - 0.5) + c * (2.0 / d - 0.5));
  return std::pow(std::pow(r0, 4) + 2.0 * k * t, 0.25);
}

inline void run_flow_maxsym(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const int dim = static_cast<int>(cfg.integer("dim"));
  const double r0 = cfg.real("r0");
  const double t_end = cfg.real("t_end");
  const double rtol = cfg.real("rtol");
  const std::size_t samples = std::max<std::size_t>(cfg.count("samples"), 2);
  std::vector<double> times;
  for (std::size_t i = 0; i < samples; ++i) times.push_back(t_end * static_cast<double>(i) / static_cast<double>(samples - 1));
  const auto traj = surface::maxsym_integrate({dim, r0, 0.0}, times, rtol);
  double worst = 0.0;
  for (const auto& s : traj) worst = std::max(worst, std::abs(s.r - maxsym_exact(dim, r0, s.t)) / maxsym_exact(dim, r0, s.t));
  rep.checks.push_back(Check::at_most("trajectory_error", worst, rtol));
  rep.metrics["constant"] = surface::maxsym_constant(dim);
  rep.metrics["r_final"] = traj.back().r;
  if (out.csv()) {
    CsvWriter w(out.file("trajectory.csv"), {"t", "r", "r_exact"});
    for (const auto& s : traj) w.row({s.t, s.r, maxsym_exact(dim, r0, s.t)});
  }
  if (out.svg()) {
    Series num{"numerical", {}, {}, false}, ex{"exact", {}, {}, true};
    for (const auto& s : traj) {
      num.x.push_back(s.t);
      num.y.push_back(s.r);
      ex.x.push_back(s.t);
      ex.y.push_back(maxsym_exact(dim, r0, s.t));
    }
    write_svg_plot({"Scale factor", "t", "r", {num, ex}}, out.file("radius.svg"));
  }
}

// -- adm-check ------------------------------------------------------------------------

/// Least-squares slope of log(residual) against log(step).
inline double convergence_order(const std::vector<double>& steps, const std::vector<double>& residuals) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    x.push_back(std::log(steps[i]));
    y.push_back(std::log(residuals[i]));
  }
  return surface::detail::fit_slope(x, y);
}

struct AdmStudy {
  std::vector<double> dts, dt_metric, dt_curvature;
  std::vector<double> hs, h_metric, h_curvature;
  double order_dt_metric = 0, order_dt_curvature = 0, order_h_metric = 0, order_h_curvature = 0;
};

/// dt refinement on a fine profile, then h refinement at a tiny dt.
inline AdmStudy adm_study(double polar, double equatorial, std::uint64_t seed, std::size_t n_fine,
                          const std::vector<double>& dts, const std::vector<double>& ns, double dt_small) {
  AdmStudy st;
  const auto fine = hyper::spheroid_profile(n_fine, polar, equatorial);
  const auto ls = hyper::random_lapse_shift(fine, seed);
  for (double dt : dts) {
    const auto r = hyper::adm_residuals(fine, ls, dt);
    st.dts.push_back(dt);
    st.dt_metric.push_back(r.metric);
    st.dt_curvature.push_back(r.curvature);
  }
  for (double n : ns) {
    const auto s = hyper::spheroid_profile(static_cast<std::size_t>(n), polar, equatorial);
    const auto r = hyper::adm_residuals(s, hyper::random_lapse_shift(s, seed), dt_small);
    st.hs.push_back(s.param_step());
    st.h_metric.push_back(r.metric);
    st.h_curvature.push_back(r.curvature);
  }
  st.order_dt_metric = convergence_order(st.dts, st.dt_metric);
  st.order_dt_curvature = convergence_order(st.dts, st.dt_curvature);
  st.order_h_metric = convergence_order(st.hs, st.h_metric);
  st.order_h_curvature = convergence_order(st.hs, st.h_curvature);
  return st;
}

inline void run_adm_check(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto st = adm_study(cfg.real("polar"), cfg.real("equatorial"), derive_seed(cfg.seed, "lapse-shift"),
                            cfg.count("n_fine"), cfg.reals("dts"), cfg.reals("ns"), cfg.real("dt_small"));
  const double tol = cfg.real("order_tolerance");
  rep.checks.push_back(Check::at_most("metric_order_dt", std::abs(st.order_dt_metric - 1.0), tol));
  rep.checks.push_back(Check::at_most("curvature_order_dt", std::abs(st.order_dt_curvature - 1.0), tol));
  rep.checks.push_back(Check::at_most("metric_order_h", std::abs(st.order_h_metric - 2.0), tol));
  rep.checks.push_back(Check::at_most("curvature_order_h", std::abs(st.order_h_curvature - 2.0), tol));
  rep.metrics["order_dt_metric"] = st.order_dt_metric;
  rep.metrics["order_dt_curvature"] = st.order_dt_curvature;
  rep.metrics["order_h_metric"] = st.order_h_metric;
  rep.metrics["order_h_curvature"] = st.order_h_curvature;
  if (out.csv()) {
    CsvWriter w(out.file("residuals.csv"), {"refine_h", "step", "metric", "curvature"});
    for (std::size_t i = 0; i < st.dts.size(); ++i) w.row(0, {st.dts[i], st.dt_metric[i], st.dt_curvature[i]});
    for (std::size_t i = 0; i < st.hs.size(); ++i) w.row(1, {st.hs[i], st.h_metric[i], st.h_curvature[i]});
  }
  if (out.svg()) {
    auto logs = [](const std::vector<double>& v) {
      std::vector<double> o;
      for (double x : v) o.push_back(std::log10(x));
      return o;
    };
    write_svg_plot({"Residuals under h refinement", "log10 h", "log10 residual",
                    {{"metric", logs(st.hs), logs(st.h_metric), false}, {"second fundamental form", logs(st.hs), logs(st.h_curvature), true}}},
                   out.file("residuals_h.svg"));
  }
}

// -- variance-flow --------------------------------------------------------------------

/// dt, dt/2 residual comparison. When the residual is at rounding level the
/// step is exact to first order and the ratio carries no information.
struct VarianceStudy {
  double residual_dt = 0, residual_half = 0, ratio = 0, scale = 0;
  bool exact = false;
  double measured = 0, predicted = 0;
};

inline VarianceStudy variance_study(const hyper::AxisymSurface& s, double dt, bool tensor) {
  auto step = [&](double h) {
    if (tensor) return hyper::variance_flow_step(s, hyper::TensorChoice::second_fundamental_form, h);
    return hyper::variance_flow_step(s, hyper::second_fundamental_form(s).mean_curvature, h);
  };
  const auto a = step(dt);
  const auto b = step(0.5 * dt);
  VarianceStudy st;
  st.measured = a.measured;
  st.predicted = a.predicted;
  st.residual_dt = std::abs(a.measured - a.predicted);
  st.residual_half = std::abs(b.measured - b.predicted);
  st.scale = std::abs(a.predicted);
  st.exact = st.residual_dt <= 1e-12 * st.scale;
  st.ratio = st.residual_dt / st.residual_half;
  return st;
}

inline void run_variance_flow(const ExperimentConfig& cfg, Output& out, Report& rep) {
  const auto s = hyper::spheroid_profile(cfg.count("n"), cfg.real("polar"), cfg.real("equatorial"));
  const double dt = cfg.real("dt");
  const auto scalar = variance_study(s, dt, false);
  const auto tensor = variance_study(s, dt, true);
  const auto flat = hyper::variance_flow_step(s, std::vector<double>(s.nodes().size(), 1.0), dt);
  rep.checks.push_back(Check::at_most("constant_field_change", std::abs(flat.measured), 1e-12));
  rep.checks.push_back(Check::at_most("scalar_decrease", scalar.measured, 0.0));
  if (scalar.exact)
    rep.checks.push_back(Check::at_most("scalar_residual_relative", scalar.residual_dt / scalar.scale, 1e-12));
  else
    rep.checks.push_back(Check::at_most("scalar_halving_ratio", std::abs(scalar.ratio - 4.0), 0.5));
  rep.checks.push_back(Check::at_most("tensor_decrease", tensor.measured, 0.0));
  rep.checks.push_back(Check::at_most("tensor_halving_ratio", std::abs(tensor.ratio - 4.0), 0.5));
  rep.metrics["scalar_measured"] = scalar.measured;
  rep.metrics["scalar_predicted"] = scalar.predicted;
  rep.metrics["scalar_residual"] = scalar.residual_dt;
  rep.metrics["tensor_measured"] = tensor.measured;
  rep.metrics["tensor_predicted"] = tensor.predicted;
  rep.metrics["tensor_ratio"] = tensor.ratio;
  if (out.csv()) {
    CsvWriter w(out.file("variance.csv"), {"tensor", "dt", "measured", "predicted", "residual"});
    for (int tensor_case = 0; tensor_case < 2; ++tensor_case)
      for (double h : {dt, 0.5 * dt, 0.25 * dt}) {
        const auto st = variance_study(s, h, tensor_case == 1);
        w.row(tensor_case, {h, st.measured, st.predicted, st.residual_dt});
      }
    hyper::write_profile_csv(s, out.file("profile.csv"));
  }
}

}  // namespace exp

inline const std::vector<Experiment>& registry() {
  using P = ParamSpec;
  using T = ParamType;
  static const std::vector<P> domain_params = {
      {"domain", T::text, "square", {"square", "rectangle", "disk"}},
      {"a", T::real, "1"},
      {"b", T::real, "1"},
      {"radius", T::real, "1"},
  };
  auto with = [](std::vector<P> base, std::initializer_list<P> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  };
  static const std::vector<Experiment> all = {
      {"spectrum", "Dirichlet spectrum of a planar domain",
       {{"domain", T::text, "square", {"square", "rectangle", "disk", "fd-square", "fd-disk"}},
        {"a", T::real, "1"},
        {"b", T::real, "1"},
        {"radius", T::real, "1"},
        {"cutoff", T::real, "1000"},
        {"h", T::real, "0.015625"},
        {"k", T::integer, "10"},
        {"fd_tolerance", T::real, "0.01"}},
       exp::run_spectrum},
      {"weyl-fit", "two-term Weyl fit of the counting function",
       with(domain_params, {{"cutoff", T::real, "1e5"},
                            {"e_min", T::real, "1e4"},
                            {"e_max", T::real, "1e5"},
                            {"vol_tolerance", T::real, "0.05"},
                            {"bvol_tolerance", T::real, "0.1"}}),
       exp::run_weyl_fit},
      {"heat-trace", "constant term of the spectral heat trace",
       with(domain_params, {{"cutoff", T::real, "4e4"},
                            {"temperatures", T::real_list, "10,15,20,25,30,35,40,45,50"},
                            {"pinned", T::boolean, "true"},
                            {"tolerance", T::real, "0.2"}}),
       exp::run_heat_trace},
      {"entropy", "canonical ensemble quantities across temperatures",
       {{"source", T::text, "disk", {"disk", "square", "torus-model", "toy"}},
        {"radius", T::real, "1"},
        {"a", T::real, "1"},
        {"cutoff", T::real, "4e4"},
        {"area", T::real, "39.47841760435743"},
        {"gamma", T::real, "1"},
        {"temperatures", T::real_list, "10,20,30,40,50"},
        {"model_tolerance", T::real, "0.02"}},
       exp::run_entropy},
      {"flow-curve", "curve-shortening or area-preserving flow of a closed curve",
       {{"curve", T::text, "ellipse"},
        {"a", T::real, "2"},
        {"b", T::real, "1"},
        {"n", T::integer, "512"},
        {"rule", T::text, "gage", {"gage", "csf"}},
        {"t_end", T::real, "1"},
        {"dt", T::real, "1e-4"},
        {"energy", T::real, "1e4"},
        {"resample_every", T::integer, "10"},
        {"snapshot_stride", T::integer, "0"},
        {"c_stab", T::real, "0.45"},
        {"omega", T::text, "sphere-area", {"sphere-area", "unit-ball"}},
        {"area_tolerance", T::real, "1e-3"},
        {"iso_target", T::real, "1.01"}},
       exp::run_flow_curve},
      {"flow-surface", "intrinsic entropy flow, perturbation decay or Perelman flow on a warped 2-metric",
       {{"mode", T::text, "entropy", {"entropy", "decay", "perelman"}},
        {"topology", T::text, "torus", {"torus", "sphere"}},
        {"variant", T::text, "normalized", {"normalized", "unnormalized"}},
        {"perelman_variant", T::text, "weighted", {"weighted", "standard"}},
        {"n", T::integer, "64"},
        {"amplitude", T::real, "0.05"},
        {"f_amplitude", T::real, "0.1"},
        {"steps", T::integer, "1000"},
        {"dt", T::real, "0"},
        {"t_end", T::real, "0.025"},
        {"sample_every", T::integer, "10"},
        {"c_stab", T::real, "0.05"},
        {"temperature", T::real, "100"},
        {"snapshot_stride", T::integer, "0"},
        {"mismatch_tolerance", T::real, "0.2"},
        {"decay_tolerance", T::real, "0.15"}},
       exp::run_flow_surface},
      {"flow-mcf", "volume-preserving mean-curvature flow of a spheroid",
       {{"n", T::integer, "64"},
        {"polar", T::real, "2"},
        {"equatorial", T::real, "1"},
        {"t_end", T::real, "10"},
        {"dt", T::real, "0"},
        {"c_stab", T::real, "0.25"},
        {"tolerance", T::real, "1e-6"},
        {"temperature", T::real, "100"},
        {"snapshot_stride", T::integer, "0"}},
       exp::run_flow_mcf},
      {"flow-maxsym", "maximally symmetric scale-factor flow",
       {{"dim", T::integer, "2"},
        {"r0", T::real, "1"},
        {"t_end", T::real, "10"},
        {"samples", T::integer, "101"},
        {"rtol", T::real, "1e-8"}},
       exp::run_flow_maxsym},
      {"adm-check", "lapse/shift evolution residuals under dt and h refinement",
       {{"polar", T::real, "2"},
        {"equatorial", T::real, "1"},
        {"n_fine", T::integer, "1024"},
        {"dts", T::real_list, "0.04,0.02,0.01"},
        {"ns", T::real_list, "128,256,512"},
        {"dt_small", T::real, "1e-5"},
        {"order_tolerance", T::real, "0.3"}},
       exp::run_adm_check},
      {"variance-flow", "boundary-volume change under scalar and tensor variance steps",
       {{"n", T::integer, "128"},
        {"polar", T::real, "2"},
        {"equatorial", T::real, "1"},
        {"dt", T::real, "0.01"}},
       exp::run_variance_flow},
  };
  return all;
}

inline const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + name + "'");
}

/// Reads and resolves a config file. The experiment comes from `experiment`
/// when given, otherwise from the file's [run] section.
inline ExperimentConfig parse_config(const std::string& path, const std::string& experiment = {}) {
  const RawConfig raw = read_ini(path);
  std::string name = experiment;
  if (name.empty()) {
    const auto it = raw.run.find("experiment");
    if (it == raw.run.end()) throw Error(ErrorCode::MissingRequired, "no experiment named on the command line or in [run]");
    name = it->second;
  }
  return resolve_config(raw, name, find_experiment(name).schema);
}

/// Runs the experiment and persists summary.json and the resolved config.
inline Report run_experiment(const ExperimentConfig& cfg) {
  const Experiment& e = find_experiment(cfg.experiment);
  Output out(cfg);
  Report rep;
  rep.experiment = cfg.experiment;
  rep.config = cfg;
  e.run(cfg, out, rep);
  {
    std::ofstream echo(out.file("resolved_config.ini"));
    echo << render_config(cfg);
  }
  const std::string summary = out.file("summary.json");
  rep.artifacts = out.artifacts();
  write_json(to_json(rep), summary);
  return rep;
}

}  // namespace specflow::harness
