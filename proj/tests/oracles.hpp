#pragma once

// Brute-force reference constructions used by the tests. They share no code
// with the library beyond the Eigen types.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace oracle {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

inline Eigen::Matrix2cd sx() { return (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(); }
inline Eigen::Matrix2cd sy() { return (Eigen::Matrix2cd() << 0, cd(0, -1), cd(0, 1), 0).finished(); }
inline Eigen::Matrix2cd sz() { return (Eigen::Matrix2cd() << 1, 0, 0, -1).finished(); }

// Operator acting on `site` of an n-site chain; site i is bit i of the index.
inline MatC embed(const Eigen::Matrix2cd& op, int site, int n) {
  const MatC left = MatC::Identity(1 << (n - 1 - site), 1 << (n - 1 - site));
  const MatC right = MatC::Identity(1 << site, 1 << site);
  return Eigen::kroneckerProduct(Eigen::kroneckerProduct(left, MatC(op)).eval(), right).eval();
}

// (1/N) sum_{i<j} w(|i-j|) sum_nu J_nu s^nu_i s^nu_j + h sum_i s^z_i with
// N = (1/(n-1)) sum_{i!=j} w(|i-j|) and w(d) = d^-alpha.
inline MatC hamiltonian(int n, double alpha, double jx, double jy, double jz, double h) {
  const int dim = 1 << n;
  MatC H = MatC::Zero(dim, dim);
  double kac = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) kac += std::pow(std::abs(i - j), -alpha);
  kac /= (n - 1);
  for (int i = 0; i < n; ++i) {
    H += h * embed(sz(), i, n);
    for (int j = i + 1; j < n; ++j) {
      const double w = std::pow(j - i, -alpha) / kac;
      H += w * (jx * embed(sx(), i, n) * embed(sx(), j, n) + jy * embed(sy(), i, n) * embed(sy(), j, n) +
                jz * embed(sz(), i, n) * embed(sz(), j, n));
    }
  }
  return H;
}

// Product state from per-site (up, down) amplitudes.
inline VecC product(const std::vector<Eigen::Vector2cd>& sites) {
  VecC psi = VecC::Ones(1);
  for (const auto& s : sites) psi = Eigen::kroneckerProduct(s, psi).eval();
  return psi;
}

// Partial trace keeping sites [first, first + count) by explicit summation.
inline MatC partial_trace(const VecC& psi, int n, int first, int count) {
  const int da = 1 << count;
  MatC rho = MatC::Zero(da, da);
  const int mask = (da - 1) << first;
  for (int x = 0; x < (1 << n); ++x)
    for (int y = 0; y < (1 << n); ++y) {
      if ((x & ~mask) != (y & ~mask)) continue;
      rho((x & mask) >> first, (y & mask) >> first) += psi(x) * std::conj(psi(y));
    }
  return rho;
}

inline double entropy(const MatC& rho) {
  Eigen::SelfAdjointEigenSolver<MatC> es(rho);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

// U(1) asymmetry by zeroing blocks of different total magnetisation.
inline double u1_asymmetry(const MatC& rho) {
  MatC deph = rho;
  for (int a = 0; a < rho.rows(); ++a)
    for (int b = 0; b < rho.cols(); ++b)
      if (__builtin_popcount(a) != __builtin_popcount(b)) deph(a, b) = 0.0;
  return entropy(deph) - entropy(rho);
}

inline MatC random_density_matrix(int dim, std::mt19937& rng, int rank = -1) {
  std::normal_distribution<double> g;
  if (rank < 0) rank = dim;
  MatC a(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = cd(g(rng), g(rng));
  MatC rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline VecC evolve(const MatC& H, const VecC& psi, double t) {
  Eigen::SelfAdjointEigenSolver<MatC> es(H);
  VecC c = es.eigenvectors().adjoint() * psi;
  for (int k = 0; k < c.size(); ++k) c(k) *= std::exp(cd(0, -es.eigenvalues()(k) * t));
  return es.eigenvectors() * c;
}

}  // namespace oracle
