#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qme/linalg.hpp"

namespace qme {

template <typename T>
using LinearMap = std::function<void(const Vec<T>&, Vec<T>&)>;

struct KrylovOptions {
  int max_dim = 30;
  /// Target error per (sub)step, relative to the vector norm.
  double tol = 1e-12;
  int max_substeps = 1 << 20;
};

struct KrylovStats {
  int matvecs = 0;
  int substeps = 0;
  double error = 0.0;  // accumulated a-posteriori estimate
};

namespace detail {

inline double real_part(double x) { return x; }
inline double real_part(const cplx& x) { return x.real(); }

// Gram-Schmidt twice against the stored basis.
template <typename T>
void reorthogonalize(const std::vector<Vec<T>>& basis, Vec<T>& w) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) w -= q * q.dot(w);
}

// exp(-i tau T) e_1 for a real symmetric tridiagonal T.
inline VectorXc tridiagonal_expm_e1(const VectorXd& alpha, const VectorXd& beta, int j, double tau) {
  MatrixXd t = MatrixXd::Zero(j, j);
  for (int k = 0; k < j; ++k) {
    t(k, k) = alpha(k);
    if (k + 1 < j) t(k, k + 1) = t(k + 1, k) = beta(k);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
  const MatrixXd& u = es.eigenvectors();
  VectorXc phase(j);
  for (int k = 0; k < j; ++k) phase(k) = std::exp(cplx(0.0, -tau * es.eigenvalues()(k))) * u(0, k);
  return u.cast<cplx>() * phase;
}

}  // namespace detail

/// exp(-i H t) v for Hermitian H given as a linear map. Lanczos with full
/// reorthogonalisation; if max_dim vectors do not reach `tol` the step is
/// split into substeps.
inline VectorXc expm_krylov(const LinearMap<cplx>& apply, const VectorXc& v, double t,
                            const KrylovOptions& opts = {}, KrylovStats* stats = nullptr) {
  VectorXc w = v;
  double remaining = t;
  double tau_try = t;
  KrylovStats local;
  const int max_dim = std::max(2, opts.max_dim);
  while (std::abs(remaining) > 0.0) {
    const double beta0 = w.norm();
    if (beta0 == 0.0) break;
    std::vector<VectorXc> basis;
    VectorXd alpha(max_dim), beta(max_dim);
    basis.push_back(w / beta0);
    VectorXc hv(w.size());
    int dim = 0;
    double tau = std::abs(tau_try) < std::abs(remaining) ? tau_try : remaining;
    VectorXc coeffs;
    bool accepted = false;
    for (int j = 0; j < max_dim; ++j) {
      apply(basis[j], hv);
      ++local.matvecs;
      alpha(j) = basis[j].dot(hv).real();
      hv -= alpha(j) * basis[j];
      if (j > 0) hv -= beta(j - 1) * basis[j - 1];
      detail::reorthogonalize(basis, hv);
      beta(j) = hv.norm();
      dim = j + 1;
      const double scale = std::abs(alpha(j)) + (j > 0 ? beta(j - 1) : 0.0) + 1.0;
      if (beta(j) <= 1e-14 * scale) {
        // Invariant subspace: the projection is exact for any time.
        tau = remaining;
        coeffs = detail::tridiagonal_expm_e1(alpha, beta, dim, tau);
        accepted = true;
        break;
      }
      coeffs = detail::tridiagonal_expm_e1(alpha, beta, dim, tau);
      const double err = beta(j) * std::abs(coeffs(dim - 1));
      if (err <= opts.tol) {
        local.error += err * beta0;
        accepted = true;
        break;
      }
      if (j + 1 < max_dim) basis.push_back(hv / beta(j));
    }
    if (!accepted) {
      // Same Krylov space, shorter time until the estimate is met.
      for (int halving = 0; halving < 60; ++halving) {
        tau *= 0.5;
        coeffs = detail::tridiagonal_expm_e1(alpha, beta, dim, tau);
        const double err = beta(dim - 1) * std::abs(coeffs(dim - 1));
        if (err <= opts.tol) {
          local.error += err * beta0;
          break;
        }
      }
    }
    VectorXc next = VectorXc::Zero(w.size());
    for (int k = 0; k < dim; ++k) next += coeffs(k) * basis[k];
    w = beta0 * next;
    remaining -= tau;
    if (std::abs(remaining) < 1e-15 * std::abs(t)) remaining = 0.0;
    tau_try = accepted ? 2.0 * tau : tau;
    if (++local.substeps > opts.max_substeps) break;
  }
  if (stats) {
    stats->matvecs += local.matvecs;
    stats->substeps += local.substeps;
    stats->error += local.error;
  }
  return w;
}

struct EigsOptions {
  int max_dim = 20;
  int max_restarts = 300;
  double tol = 1e-14;
};

template <typename T>
struct EigsResult {
  double value = 0.0;
  Vec<T> vector;
  bool converged = false;
  int matvecs = 0;
  int restarts = 0;
  double residual = 0.0;
};

/// Lowest eigenpair of a Hermitian map by restarted Lanczos (thick restart
/// with the current Ritz vector). Convergence is declared when the residual
/// estimate falls below max(tol, 64 eps |lambda|), the latter being the
/// rounding floor of the matrix-vector product.
template <typename T>
EigsResult<T> lowest_eigenpair(const LinearMap<T>& apply, const Vec<T>& start,
                               const EigsOptions& opts = {}) {
  EigsResult<T> res;
  Vec<T> x = start;
  double nx = x.norm();
  if (nx == 0.0) {
    x = Vec<T>::Ones(start.size());
    nx = x.norm();
  }
  x /= nx;
  const int max_dim = std::max(2, std::min<int>(opts.max_dim, static_cast<int>(x.size())));
  Vec<T> hv(x.size());
  double last_value = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, opts.max_restarts); ++restart) {
    res.restarts = restart + 1;
    std::vector<Vec<T>> basis{x};
    VectorXd alpha(max_dim), beta(max_dim);
    int dim = 0;
    double theta = 0.0;
    VectorXd y;
    double resid = 0.0;
    bool exhausted = false;
    for (int j = 0; j < max_dim; ++j) {
      apply(basis[j], hv);
      ++res.matvecs;
      alpha(j) = detail::real_part(basis[j].dot(hv));
      hv -= alpha(j) * basis[j];
      if (j > 0) hv -= beta(j - 1) * basis[j - 1];
      detail::reorthogonalize(basis, hv);
      beta(j) = hv.norm();
      dim = j + 1;
      MatrixXd t = MatrixXd::Zero(dim, dim);
      for (int k = 0; k < dim; ++k) {
        t(k, k) = alpha(k);
        if (k + 1 < dim) t(k, k + 1) = t(k + 1, k) = beta(k);
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
      theta = es.eigenvalues()(0);
      y = es.eigenvectors().col(0);
      resid = beta(j) * std::abs(y(dim - 1));
      const double floor = std::max(opts.tol, 64.0 * std::numeric_limits<double>::epsilon() *
                                                  std::max(1.0, std::abs(theta)));
      if (resid <= floor) {
        res.converged = true;
        break;
      }
      const double scale = std::abs(alpha(j)) + (j > 0 ? beta(j - 1) : 0.0) + 1.0;
      if (beta(j) <= 1e-14 * scale) {
        exhausted = true;
        break;
      }
      if (j + 1 < max_dim) basis.push_back(hv / beta(j));
    }
    Vec<T> ritz = Vec<T>::Zero(x.size());
    for (int k = 0; k < dim; ++k) ritz += y(k) * basis[k];
    x = ritz / ritz.norm();
    res.value = theta;
    res.residual = resid;
    if (res.converged || exhausted) {
      res.converged = true;
      break;
    }
    // Ritz value stagnated at rounding level: further restarts cannot help.
    if (std::abs(theta - last_value) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                             std::max(1.0, std::abs(theta)))
      break;
    last_value = theta;
  }
  res.vector = x;
  return res;
}

}  // namespace qme
