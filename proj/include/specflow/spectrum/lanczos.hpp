#pragma once

// Lanczos iteration with full reorthogonalization for the largest
// eigenvalues of a symmetric operator given as a matrix-vector callback.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "specflow/core/error.hpp"
#include "specflow/core/random.hpp"

namespace specflow::spectral {

struct LanczosOptions {
  std::size_t max_iter = 400;
  double tol = 1e-11;  // relative Ritz residual
  std::uint64_t seed = 0;
  std::size_t check_every = 5;
};

struct LanczosResult {
  std::vector<double> values;  // descending
  std::size_t iterations = 0;
  double max_residual = 0.0;
};

namespace detail {

struct RitzBatch {
  std::vector<double> values;  // descending
  std::vector<Eigen::VectorXd> vectors;
  std::size_t iterations = 0;
  double max_residual = 0.0;
};

// One Lanczos run in the orthogonal complement of `locked`.
template <class Apply>
RitzBatch lanczos_run(Apply& apply, std::size_t n, std::size_t want, const std::vector<Eigen::VectorXd>& locked,
                      const LanczosOptions& opt, Rng& rng) {
  const std::size_t free_dim = n - locked.size();
  const std::size_t max_iter = std::min(opt.max_iter, free_dim);
  want = std::min(want, free_dim);
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(max_iter + 1);
  std::vector<double> alpha, beta;

  auto orthogonalize = [&](Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : locked) w -= q.dot(w) * q;
      for (const auto& q : basis) w -= q.dot(w) * q;
    }
  };
  auto random_unit = [&]() {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = rng.normal();
    orthogonalize(v);
    return Eigen::VectorXd(v / v.norm());
  };

  basis.push_back(random_unit());
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < max_iter; ++j) {
    apply(basis[j], w);
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    const double a = basis[j].dot(w);
    alpha.push_back(a);
    w -= a * basis[j];
    orthogonalize(w);
    const double b = w.norm();

    const std::size_t m = j + 1;
    const bool last = (m == max_iter);
    if (m >= want && (m % opt.check_every == 0 || last || b < 1e-14)) {
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(m));
      Eigen::VectorXd sub(static_cast<Eigen::Index>(m - 1));
      for (std::size_t i = 0; i + 1 < m; ++i) sub[static_cast<Eigen::Index>(i)] = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const auto& theta = tri.eigenvalues();
      const auto& vecs = tri.eigenvectors();
      double worst = 0.0;
      for (std::size_t i = 0; i < want; ++i) {
        const Eigen::Index col = static_cast<Eigen::Index>(m - 1 - i);
        const double res = b * std::abs(vecs(static_cast<Eigen::Index>(m - 1), col));
        worst = std::max(worst, res / std::max(std::abs(theta[col]), 1e-300));
      }
      if (worst <= opt.tol || last || b < 1e-14) {
        if (worst > opt.tol && m < free_dim)
          throw Error(ErrorCode::ConvergenceFailure, "Lanczos did not reach the requested tolerance");
        RitzBatch out;
        out.iterations = m;
        out.max_residual = worst;
        for (std::size_t i = 0; i < want; ++i) {
          const Eigen::Index col = static_cast<Eigen::Index>(m - 1 - i);
          out.values.push_back(theta[col]);
          Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
          for (std::size_t r = 0; r < m; ++r) v += vecs(static_cast<Eigen::Index>(r), col) * basis[r];
          out.vectors.push_back(v / v.norm());
        }
        return out;
      }
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  throw Error(ErrorCode::ConvergenceFailure, "Lanczos iteration limit reached");
}

}  // namespace detail

/// `apply(x, y)` must write A x into y. Returns the k largest eigenvalues
/// with multiplicity. A single Krylov space sees one direction per
/// eigenspace, so converged Ritz vectors are locked and the iteration is
/// restarted in their complement until no further value enters the top k.
template <class Apply>
LanczosResult lanczos_largest(Apply&& apply, std::size_t n, std::size_t k, const LanczosOptions& opt = {}) {
  if (k == 0 || k > n) throw Error(ErrorCode::InvalidArgument, "Lanczos needs 1 <= k <= n");
  Rng rng(opt.seed);
  std::vector<Eigen::VectorXd> locked;
  std::vector<double> found;
  LanczosResult result;
  for (int restart = 0; restart < 64 && locked.size() < n; ++restart) {
    const auto batch = detail::lanczos_run(apply, n, k, locked, opt, rng);
    result.iterations += batch.iterations;
    result.max_residual = std::max(result.max_residual, batch.max_residual);
    std::vector<double> sorted = found;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double kth = sorted.size() >= k ? sorted[k - 1] : -std::numeric_limits<double>::infinity();
    const double tol = 1e-9 * std::abs(kth);
    if (!batch.values.empty() && batch.values.front() < kth - tol) break;
    for (std::size_t i = 0; i < batch.values.size(); ++i) {
      found.push_back(batch.values[i]);
      locked.push_back(batch.vectors[i]);
    }
    if (batch.values.empty()) break;
  }
  std::sort(found.begin(), found.end(), std::greater<>());
  found.resize(std::min(found.size(), k));
  result.values = std::move(found);
  return result;
}

}  // namespace specflow::spectral
