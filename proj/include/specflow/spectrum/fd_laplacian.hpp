#pragma once

// 5-point Dirichlet Laplacian on a boolean grid mask and its lowest
// eigenvalues.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/core/error.hpp"
#include "specflow/spectrum/lanczos.hpp"
#include "specflow/spectrum/spectrum.hpp"

namespace specflow::spectral {

/// Row-major grid of candidate nodes; `inside` marks interior points.
/// Nodes outside the mask carry the Dirichlet value 0.
class DomainMask {
 public:
  DomainMask(std::size_t nx, std::size_t ny, double spacing, std::vector<std::uint8_t> inside)
      : nx_(nx), ny_(ny), h_(spacing), inside_(std::move(inside)) {
    if (!(h_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
    if (inside_.size() != nx_ * ny_) throw Error(ErrorCode::InvalidArgument, "mask size does not match grid");
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double spacing() const { return h_; }
  bool inside(std::size_t i, std::size_t j) const { return inside_[j * nx_ + i] != 0; }
  std::size_t interior_count() const {
    std::size_t c = 0;
    for (auto v : inside_) c += v != 0;
    return c;
  }

  /// Interior nodes of a [0,side]^2 grid with spacing side/cells.
  static DomainMask square(double side, std::size_t cells) {
    const std::size_t n = cells - 1;
    return DomainMask(n, n, side / static_cast<double>(cells), std::vector<std::uint8_t>(n * n, 1));
  }

  /// Nodes strictly inside the disk of the given radius, spacing h.
  static DomainMask disk(double radius, double h) {
    const long half = static_cast<long>(std::ceil(radius / h));
    const std::size_t n = static_cast<std::size_t>(2 * half + 1);
    std::vector<std::uint8_t> in(n * n, 0);
    for (long j = -half; j <= half; ++j)
      for (long i = -half; i <= half; ++i) {
        const double x = static_cast<double>(i) * h, y = static_cast<double>(j) * h;
        if (x * x + y * y < radius * radius)
          in[static_cast<std::size_t>(j + half) * n + static_cast<std::size_t>(i + half)] = 1;
      }
    return DomainMask(n, n, h, std::move(in));
  }

  static DomainMask read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open mask file " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("h=", 0) != 0) throw Error(ErrorCode::Io, "mask header must be h=<spacing>");
    const double h = std::stod(line.substr(2));
    std::vector<std::uint8_t> cells;
    std::size_t nx = 0, ny = 0;
    while (std::getline(in, line)) {
      std::vector<std::uint8_t> row;
      for (char ch : line) {
        if (ch == '0' || ch == '1') row.push_back(ch == '1');
      }
      if (row.empty()) continue;
      if (nx == 0) nx = row.size();
      if (row.size() != nx) throw Error(ErrorCode::Io, "ragged mask row");
      cells.insert(cells.end(), row.begin(), row.end());
      ++ny;
    }
    return DomainMask(nx, ny, h, std::move(cells));
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write mask file " + path);
    out << "h=" << format_double(h_) << '\n';
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) out << (i ? " " : "") << (inside(i, j) ? '1' : '0');
      out << '\n';
    }
  }

 private:
  std::size_t nx_, ny_;
  double h_;
  std::vector<std::uint8_t> inside_;
};

/// 4-neighbour connectivity of the interior nodes.
inline bool is_connected(const DomainMask& mask) {
  const std::size_t nx = mask.nx(), ny = mask.ny();
  std::vector<std::uint8_t> seen(nx * ny, 0);
  std::size_t start = nx * ny;
  for (std::size_t k = 0; k < nx * ny; ++k)
    if (mask.inside(k % nx, k / nx)) { start = k; break; }
  if (start == nx * ny) return false;
  std::queue<std::size_t> todo;
  todo.push(start);
  seen[start] = 1;
  std::size_t reached = 0;
  while (!todo.empty()) {
    const std::size_t k = todo.front();
    todo.pop();
    ++reached;
    const std::size_t i = k % nx, j = k / nx;
    auto visit = [&](std::size_t ii, std::size_t jj) {
      const std::size_t kk = jj * nx + ii;
      if (mask.inside(ii, jj) && !seen[kk]) { seen[kk] = 1; todo.push(kk); }
    };
    if (i > 0) visit(i - 1, j);
    if (i + 1 < nx) visit(i + 1, j);
    if (j > 0) visit(i, j - 1);
    if (j + 1 < ny) visit(i, j + 1);
  }
  return reached == mask.interior_count();
}

/// Negative 5-point Laplacian restricted to interior nodes.
inline Eigen::SparseMatrix<double> assemble_dirichlet_laplacian(const DomainMask& mask) {
  const std::size_t nx = mask.nx(), ny = mask.ny();
  std::vector<long> index(nx * ny, -1);
  long count = 0;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      if (mask.inside(i, j)) index[j * nx + i] = count++;
  const double inv_h2 = 1.0 / (mask.spacing() * mask.spacing());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(count) * 5);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const long row = index[j * nx + i];
      if (row < 0) continue;
      trip.emplace_back(row, row, 4.0 * inv_h2);
      auto link = [&](std::size_t ii, std::size_t jj) {
        const long col = index[jj * nx + ii];
        if (col >= 0) trip.emplace_back(row, col, -inv_h2);
      };
      if (i > 0) link(i - 1, j);
      if (i + 1 < nx) link(i + 1, j);
      if (j > 0) link(i, j - 1);
      if (j + 1 < ny) link(i, j + 1);
    }
  Eigen::SparseMatrix<double> a(count, count);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

enum class LanczosMode {
  shift_invert,  // Lanczos on A^{-1}: lowest eigenvalues converge fastest
  direct         // Lanczos on (c I - A) with c a Gershgorin bound
};

struct FdOptions {
  std::size_t dense_threshold = 2000;
  LanczosMode mode = LanczosMode::shift_invert;
  LanczosOptions lanczos{};
};

inline Spectrum fd_dirichlet_spectrum(const DomainMask& mask, std::size_t k, const FdOptions& opt = {}) {
  const std::size_t n = mask.interior_count();
  if (k == 0 || k > n) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, interior point count]");
  if (!is_connected(mask)) throw Error(ErrorCode::NotConnected, "mask interior is not connected");
  const Eigen::SparseMatrix<double> a = assemble_dirichlet_laplacian(mask);

  std::vector<double> values;
  if (n < opt.dense_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(Eigen::MatrixXd(a), Eigen::EigenvaluesOnly);
    for (std::size_t i = 0; i < k; ++i) values.push_back(dense.eigenvalues()[static_cast<Eigen::Index>(i)]);
  } else if (opt.mode == LanczosMode::shift_invert) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(a);
    if (chol.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "Laplacian factorization failed");
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = chol.solve(x); };
    const auto res = lanczos_largest(apply, n, k, opt.lanczos);
    for (double mu : res.values) values.push_back(1.0 / mu);
  } else {
    const double shift = 8.0 / (mask.spacing() * mask.spacing());
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = shift * x - a * x; };
    LanczosOptions lo = opt.lanczos;
    lo.max_iter = std::max<std::size_t>(lo.max_iter, 4000);
    const auto res = lanczos_largest(apply, n, k, lo);
    for (double mu : res.values) values.push_back(shift - mu);
  }
  std::sort(values.begin(), values.end());
  DomainMeta meta;
  meta.area = static_cast<double>(n) * mask.spacing() * mask.spacing();
  meta.note = "5-point finite differences; eigenvalues carry O(h^2) discretization error";
  const double top = values.back();
  return Spectrum::make(std::move(values), top, SpectrumSource::finite_difference, std::move(meta));
}

}  // namespace specflow::spectral
