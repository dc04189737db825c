#pragma once

// Warped 2-metrics g = A(x) dx^2 + B(x) dy^2 with a 2 pi periodic fibre
// coordinate y, on a torus band or a sphere of revolution. Derivatives in x
// are Fourier pseudo-spectral; on the sphere the half-period grid is
// staggered, (j + 1/2) h, and fields are reflected across the poles with
// their parity (A, B and scalars even; sqrt(B) and x-covectors odd).

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "specflow/core/error.hpp"

namespace specflow::surface {

using Field = Eigen::VectorXd;

enum class Topology { torus, sphere };
enum class Parity { even, odd };

inline const char* to_string(Topology t) { return t == Topology::torus ? "torus" : "sphere"; }

/// Differentiation matrices and quadrature weights for one grid.
class SpectralGrid {
 public:
  /// Torus: n even, nodes j * period / n. Sphere: n nodes on [0, extent],
  /// reflected to a periodic grid of 2n nodes and period 2 * extent.
  SpectralGrid(Topology topo, std::size_t n, double extent) : topo_(topo), n_(n), extent_(extent) {
    if (!(extent > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid extent must be positive");
    if (topo == Topology::torus && (n < 8 || n % 2 != 0))
      throw Error(ErrorCode::InvalidArgument, "torus grid needs an even node count >= 8");
    if (topo == Topology::sphere && n < 4) throw Error(ErrorCode::InvalidArgument, "sphere grid needs >= 4 nodes");
    const auto ni = static_cast<Eigen::Index>(n);
    x_.resize(ni);
    weights_.resize(ni);
    const double pi = std::numbers::pi;
    if (topo == Topology::torus) {
      h_ = extent / static_cast<double>(n);
      for (Eigen::Index j = 0; j < ni; ++j) x_[j] = static_cast<double>(j) * h_;
      weights_.setConstant(h_);
      d1_even_ = periodic_d1(n, extent);
      d2_even_ = periodic_d2(n, extent);
      d1_odd_ = d1_even_;
      d2_odd_ = d2_even_;
    } else {
      h_ = extent / static_cast<double>(n);
      for (Eigen::Index j = 0; j < ni; ++j) x_[j] = (static_cast<double>(j) + 0.5) * h_;
      const std::size_t full = 2 * n;
      const Eigen::MatrixXd d1 = periodic_d1(full, 2.0 * extent);
      const Eigen::MatrixXd d2 = periodic_d2(full, 2.0 * extent);
      d1_even_.resize(ni, ni);
      d1_odd_.resize(ni, ni);
      d2_even_.resize(ni, ni);
      d2_odd_.resize(ni, ni);
      for (Eigen::Index i = 0; i < ni; ++i)
        for (Eigen::Index j = 0; j < ni; ++j) {
          const Eigen::Index mirror = static_cast<Eigen::Index>(full) - 1 - j;
          d1_even_(i, j) = d1(i, j) + d1(i, mirror);
          d1_odd_(i, j) = d1(i, j) - d1(i, mirror);
          d2_even_(i, j) = d2(i, j) + d2(i, mirror);
          d2_odd_(i, j) = d2(i, j) - d2(i, mirror);
        }
      // Integrate the sine interpolant of an odd integrand exactly.
      for (Eigen::Index j = 0; j < ni; ++j) {
        double w = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
          if (k % 2 == 0) continue;  // even modes integrate to zero
          const double c = (k < n) ? 2.0 / static_cast<double>(n) : 1.0 / static_cast<double>(n);
          const double ik = 2.0 * extent / (static_cast<double>(k) * pi);
          w += c * std::sin(static_cast<double>(k) * pi * x_[j] / extent) * ik;
        }
        weights_[j] = w;
      }
    }
  }

  Topology topology() const { return topo_; }
  std::size_t size() const { return n_; }
  double extent() const { return extent_; }
  double spacing() const { return h_; }
  const Field& nodes() const { return x_; }
  /// sum_j w_j F_j approximates the integral of F over [0, extent] (F odd
  /// under reflection on the sphere, as integrands carrying sqrt(B) are).
  const Field& weights() const { return weights_; }

  Field d1(const Field& f, Parity p = Parity::even) const { return (p == Parity::even ? d1_even_ : d1_odd_) * f; }
  Field d2(const Field& f, Parity p = Parity::even) const { return (p == Parity::even ? d2_even_ : d2_odd_) * f; }

 private:
  static Eigen::MatrixXd periodic_d1(std::size_t n, double period) {
    const auto ni = static_cast<Eigen::Index>(n);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double scale = 2.0 * std::numbers::pi / period;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i)
      for (Eigen::Index j = 0; j < ni; ++j) {
        if (i == j) continue;
        const long k = static_cast<long>(i - j);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        d(i, j) = scale * 0.5 * sign / std::tan(0.5 * static_cast<double>(k) * h);
      }
    return d;
  }

  static Eigen::MatrixXd periodic_d2(std::size_t n, double period) {
    const auto ni = static_cast<Eigen::Index>(n);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double scale = std::pow(2.0 * std::numbers::pi / period, 2);
    Eigen::MatrixXd d(ni, ni);
    const double diag = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
    for (Eigen::Index i = 0; i < ni; ++i)
      for (Eigen::Index j = 0; j < ni; ++j) {
        if (i == j) {
          d(i, j) = scale * diag;
          continue;
        }
        const long k = static_cast<long>(i - j);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double s = std::sin(0.5 * static_cast<double>(k) * h);
        d(i, j) = -scale * 0.5 * sign / (s * s);
      }
    return d;
  }

  Topology topo_;
  std::size_t n_;
  double extent_;
  double h_ = 0.0;
  Field x_, weights_;
  Eigen::MatrixXd d1_even_, d1_odd_, d2_even_, d2_odd_;
};

struct MetricOptions {
  double pole_tolerance = 1e-3;  // allowed deviation of the pole cone factor from 1
};

/// g = A dx^2 + B dy^2 sampled on a SpectralGrid.
class WarpedMetric2D {
 public:
  WarpedMetric2D(std::shared_ptr<const SpectralGrid> grid, Field a, Field b, const MetricOptions& opt = {})
      : grid_(std::move(grid)), a_(std::move(a)), b_(std::move(b)), opt_(opt) {
    const auto n = static_cast<Eigen::Index>(grid_->size());
    if (a_.size() != n || b_.size() != n) throw Error(ErrorCode::InvalidArgument, "metric field size mismatch");
    if (!(a_.array() > 0.0).all() || !(b_.array() > 0.0).all() || !a_.allFinite() || !b_.allFinite())
      throw Error(ErrorCode::PositivityLost, "metric components must stay positive");
    if (grid_->topology() == Topology::sphere) check_poles();
  }

  const SpectralGrid& grid() const { return *grid_; }
  std::shared_ptr<const SpectralGrid> grid_ptr() const { return grid_; }
  Topology topology() const { return grid_->topology(); }
  std::size_t size() const { return grid_->size(); }
  const Field& a() const { return a_; }
  const Field& b() const { return b_; }
  const MetricOptions& options() const { return opt_; }
  Field sqrt_det() const { return (a_.array() * b_.array()).sqrt().matrix(); }

  /// Cone factor d(sqrt B)/d(distance) extrapolated to each pole; 1 and -1
  /// for a smooth sphere.
  std::pair<double, double> pole_factors() const {
    const Field f = grid_->d1(b_.array().sqrt().matrix(), Parity::odd).cwiseQuotient(a_.cwiseSqrt());
    const auto n = f.size();
    const double south = (9.0 * f[0] - f[1]) / 8.0;
    const double north = (9.0 * f[n - 1] - f[n - 2]) / 8.0;
    return {south, north};
  }

 private:
  void check_poles() const {
    const auto [south, north] = pole_factors();
    if (std::abs(south - 1.0) > opt_.pole_tolerance || std::abs(north + 1.0) > opt_.pole_tolerance)
      throw Error(ErrorCode::PoleRegularityViolated,
                  "sphere metric has a cone point (pole factors " + std::to_string(south) + ", " +
                      std::to_string(north) + ")");
  }

  std::shared_ptr<const SpectralGrid> grid_;
  Field a_, b_;
  MetricOptions opt_;
};

using Profile = std::function<double(double)>;

inline WarpedMetric2D make_torus_metric(std::size_t n, double period, const Profile& a, const Profile& b) {
  auto grid = std::make_shared<const SpectralGrid>(Topology::torus, n, period);
  Field fa(static_cast<Eigen::Index>(n)), fb(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < fa.size(); ++j) {
    fa[j] = a(grid->nodes()[j]);
    fb[j] = b(grid->nodes()[j]);
  }
  return WarpedMetric2D(grid, fa, fb);
}

inline WarpedMetric2D make_sphere_metric(std::size_t n, double length, const Profile& a, const Profile& b,
                                         const MetricOptions& opt = {}) {
  auto grid = std::make_shared<const SpectralGrid>(Topology::sphere, n, length);
  Field fa(static_cast<Eigen::Index>(n)), fb(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < fa.size(); ++j) {
    fa[j] = a(grid->nodes()[j]);
    fb[j] = b(grid->nodes()[j]);
  }
  return WarpedMetric2D(grid, fa, fb, opt);
}

inline WarpedMetric2D flat_torus(std::size_t n, double period = 2.0 * std::numbers::pi) {
  return make_torus_metric(n, period, [](double) { return 1.0; }, [](double) { return 1.0; });
}

inline WarpedMetric2D round_sphere(std::size_t n, double radius = 1.0) {
  return make_sphere_metric(
      n, std::numbers::pi, [radius](double) { return radius * radius; },
      [radius](double x) { return radius * radius * std::sin(x) * std::sin(x); });
}

/// Same grid, new components.
inline WarpedMetric2D with_components(const WarpedMetric2D& m, Field a, Field b) {
  return WarpedMetric2D(m.grid_ptr(), std::move(a), std::move(b), m.options());
}

// -- geometry ---------------------------------------------------------------

/// Integral of phi over the surface (fibre length 2 pi included).
inline double integrate(const WarpedMetric2D& m, const Field& phi) {
  return 2.0 * std::numbers::pi * m.grid().weights().dot(phi.cwiseProduct(m.sqrt_det()));
}

inline double volume(const WarpedMetric2D& m) {
  return integrate(m, Field::Ones(static_cast<Eigen::Index>(m.size())));
}

inline double manifold_mean(const WarpedMetric2D& m, const Field& phi) { return integrate(m, phi) / volume(m); }

/// R = -(2 / sqrt(AB)) d/dx( (d sqrt(B)/dx) / sqrt(A) ).
inline Field scalar_curvature(const WarpedMetric2D& m) {
  const auto& g = m.grid();
  const Field sa = m.a().cwiseSqrt();
  const Field sb = m.b().cwiseSqrt();
  const Field inner = g.d1(sb, Parity::odd).cwiseQuotient(sa);
  return (-2.0 * g.d1(inner, Parity::even).array() / (sa.array() * sb.array())).matrix();
}

/// Diagonal symmetric tensor field: xx and yy components (xy vanishes for
/// fields that depend on x only).
struct DiagTensor {
  Field xx, yy;
};

/// Components of grad_i grad_j phi for an even scalar phi.
inline DiagTensor covariant_hessian(const WarpedMetric2D& m, const Field& phi) {
  const auto& g = m.grid();
  const Field dphi = g.d1(phi, Parity::even);
  const Field d2phi = g.d2(phi, Parity::even);
  const Field da = g.d1(m.a(), Parity::even);
  const Field db = g.d1(m.b(), Parity::even);
  DiagTensor h;
  h.xx = (d2phi.array() - da.array() * dphi.array() / (2.0 * m.a().array())).matrix();
  h.yy = (db.array() * dphi.array() / (2.0 * m.a().array())).matrix();
  return h;
}

inline Field tensor_trace(const WarpedMetric2D& m, const DiagTensor& t) {
  return (t.xx.array() / m.a().array() + t.yy.array() / m.b().array()).matrix();
}

/// Laplace-Beltrami in divergence form (1/sqrt g) d( sqrt(B/A) dphi ).
inline Field laplacian(const WarpedMetric2D& m, const Field& phi) {
  const auto& g = m.grid();
  const Field flux = ((m.b().array() / m.a().array()).sqrt() * g.d1(phi, Parity::even).array()).matrix();
  return (g.d1(flux, Parity::even).array() / m.sqrt_det().array()).matrix();
}

/// |grad phi|^2 = (dphi/dx)^2 / A.
inline Field gradient_norm2(const WarpedMetric2D& m, const Field& phi) {
  const Field d = m.grid().d1(phi, Parity::even);
  return (d.array().square() / m.a().array()).matrix();
}

inline double euler_characteristic(const WarpedMetric2D& m) { return m.topology() == Topology::torus ? 0.0 : 2.0; }

/// Integral of R minus 4 pi chi.
inline double gauss_bonnet_defect(const WarpedMetric2D& m) {
  return integrate(m, scalar_curvature(m)) - 4.0 * std::numbers::pi * euler_characteristic(m);
}

}  // namespace specflow::surface
