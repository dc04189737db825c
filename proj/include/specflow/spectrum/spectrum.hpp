#pragma once

// Sorted Dirichlet spectra with a completeness cutoff, counting function,
// density of states, and the analytic model problems (rectangle, disk,
// flat torus).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/core/csv.hpp"
#include "specflow/core/error.hpp"
#include "specflow/spectrum/bessel.hpp"

namespace specflow::spectral {

enum class SpectrumSource { analytic_rectangle, analytic_disk, analytic_torus, finite_difference, explicit_list };

inline const char* to_string(SpectrumSource s) {
  switch (s) {
    case SpectrumSource::analytic_rectangle: return "analytic-rectangle";
    case SpectrumSource::analytic_disk: return "analytic-disk";
    case SpectrumSource::analytic_torus: return "analytic-torus";
    case SpectrumSource::finite_difference: return "finite-difference";
    case SpectrumSource::explicit_list: return "explicit-list";
  }
  return "unknown";
}

struct DomainMeta {
  std::optional<double> area;
  std::optional<double> perimeter;
  bool closed_manifold = false;  // no boundary: the constant mode 0 is allowed
  std::string note;
};

class Spectrum {
 public:
  /// Sorts the values; rejects non-positive entries except a zero mode on
  /// closed manifolds.
  static Spectrum make(std::vector<double> values, double complete_up_to, SpectrumSource source,
                       DomainMeta meta = {}) {
    std::sort(values.begin(), values.end());
    for (double v : values) {
      const bool ok = meta.closed_manifold ? v >= 0.0 : v > 0.0;
      if (!ok || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "spectrum entries must be positive");
    }
    if (!(complete_up_to >= 0.0)) throw Error(ErrorCode::InvalidArgument, "completeness cutoff must be >= 0");
    Spectrum s;
    s.values_ = std::move(values);
    s.complete_up_to_ = complete_up_to;
    s.source_ = source;
    s.meta_ = std::move(meta);
    return s;
  }

  std::span<const double> eigenvalues() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double complete_up_to() const { return complete_up_to_; }
  SpectrumSource source() const { return source_; }
  const DomainMeta& meta() const { return meta_; }

 private:
  Spectrum() = default;
  std::vector<double> values_;
  double complete_up_to_ = 0.0;
  SpectrumSource source_ = SpectrumSource::explicit_list;
  DomainMeta meta_;
};

/// N(E) = #{eigenvalues <= E}, with multiplicity.
inline std::size_t counting_function(const Spectrum& s, double energy) {
  if (energy > s.complete_up_to())
    throw Error(ErrorCode::BeyondCompleteness, "counting beyond the completeness cutoff");
  const auto ev = s.eigenvalues();
  return static_cast<std::size_t>(std::upper_bound(ev.begin(), ev.end(), energy) - ev.begin());
}

/// (N(E + dE) - N(E)) / dE.
inline double density_of_states(const Spectrum& s, double energy, double window) {
  if (!(window > 0.0)) throw Error(ErrorCode::InvalidArgument, "density window must be positive");
  const double hi = static_cast<double>(counting_function(s, energy + window));
  const double lo = static_cast<double>(counting_function(s, energy));
  return (hi - lo) / window;
}

struct EnumerationLimits {
  std::size_t max_count = 50'000'000;  // memory guard for lattice spectra
  int max_bessel_order = 400;
};

inline Spectrum rectangle_spectrum(double a, double b, double cutoff, const EnumerationLimits& limits = {}) {
  if (!(a > 0.0 && b > 0.0 && cutoff > 0.0))
    throw Error(ErrorCode::InvalidArgument, "rectangle sides and cutoff must be positive");
  const double expected = a * b * cutoff / (4.0 * std::numbers::pi);
  if (expected > static_cast<double>(limits.max_count))
    throw Error(ErrorCode::CutoffTooLarge, "rectangle cutoff exceeds the eigenvalue cap");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(expected * 1.1) + 16);
  for (long m = 1;; ++m) {
    const double em = pi2 * static_cast<double>(m * m) / (a * a);
    if (em + pi2 / (b * b) > cutoff) break;
    for (long n = 1;; ++n) {
      const double v = em + pi2 * static_cast<double>(n * n) / (b * b);
      if (v > cutoff) break;
      values.push_back(v);
    }
  }
  DomainMeta meta{a * b, 2.0 * (a + b), false, "rectangle"};
  return Spectrum::make(std::move(values), cutoff, SpectrumSource::analytic_rectangle, meta);
}

/// (j_{m,k}/r)^2 with multiplicity 2 for m >= 1.
inline Spectrum disk_spectrum(double radius, double cutoff, const EnumerationLimits& limits = {}) {
  if (!(radius > 0.0 && cutoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius and cutoff must be positive");
  const double x_max = radius * std::sqrt(cutoff);
  // j_{m,1} > m, so no order above x_max contributes.
  if (x_max > static_cast<double>(limits.max_bessel_order))
    throw Error(ErrorCode::CutoffTooLarge, "disk cutoff needs Bessel orders beyond the configured limit");
  std::vector<double> values;
  for (int m = 0; m <= static_cast<int>(x_max); ++m) {
    const auto zeros = bessel_zeros_below(m, x_max);
    for (double j : zeros) {
      const double v = (j / radius) * (j / radius);
      if (v > cutoff) continue;
      values.push_back(v);
      if (m > 0) values.push_back(v);
    }
  }
  const double pi = std::numbers::pi;
  DomainMeta meta{pi * radius * radius, 2.0 * pi * radius, false, "disk"};
  return Spectrum::make(std::move(values), cutoff, SpectrumSource::analytic_disk, meta);
}

/// Flat torus [0,lx) x [0,ly): (2 pi)^2 (m^2/lx^2 + n^2/ly^2), m, n in Z,
/// including the zero mode.
inline Spectrum torus_spectrum(double lx, double ly, double cutoff, const EnumerationLimits& limits = {}) {
  if (!(lx > 0.0 && ly > 0.0 && cutoff > 0.0))
    throw Error(ErrorCode::InvalidArgument, "torus sides and cutoff must be positive");
  if (lx * ly * cutoff / (4.0 * std::numbers::pi) > static_cast<double>(limits.max_count))
    throw Error(ErrorCode::CutoffTooLarge, "torus cutoff exceeds the eigenvalue cap");
  const double k2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const long m_max = static_cast<long>(std::sqrt(cutoff / k2) * lx) + 1;
  std::vector<double> values;
  for (long m = -m_max; m <= m_max; ++m) {
    const double em = k2 * static_cast<double>(m * m) / (lx * lx);
    if (em > cutoff) continue;
    const long n_max = static_cast<long>(std::sqrt((cutoff - em) / k2) * ly) + 1;
    for (long n = -n_max; n <= n_max; ++n) {
      const double v = em + k2 * static_cast<double>(n * n) / (ly * ly);
      if (v <= cutoff) values.push_back(v);
    }
  }
  DomainMeta meta{lx * ly, 0.0, true, "flat torus"};
  return Spectrum::make(std::move(values), cutoff, SpectrumSource::analytic_torus, meta);
}

inline void write_spectrum_csv(const Spectrum& s, const std::string& path) {
  CsvWriter out(path, {"index", "eigenvalue"});
  for (std::size_t i = 0; i < s.size(); ++i) out.row(static_cast<long long>(i + 1), {s[i]});
}

inline Spectrum read_spectrum_csv(const std::string& path, double complete_up_to, DomainMeta meta = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open spectrum file " + path);
  std::vector<double> values;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double index = 0.0, value = 0.0;
    if (!(row >> index >> value)) throw Error(ErrorCode::Io, "malformed spectrum row: " + line);
    values.push_back(value);
  }
  return Spectrum::make(std::move(values), complete_up_to, SpectrumSource::explicit_list, std::move(meta));
}

}  // namespace specflow::spectral
