#pragma once

#include <complex>
#include <Eigen/Dense>

namespace qme {

using cplx = std::complex<double>;
using MatrixXd = Eigen::MatrixXd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXd = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Single-site basis order is (up, down) with sigma^z |up> = +|up>.
namespace pauli {
inline Eigen::Matrix2d x() { return (Eigen::Matrix2d() << 0, 1, 1, 0).finished(); }
/// i * sigma^y, which is real.
inline Eigen::Matrix2d iy() { return (Eigen::Matrix2d() << 0, 1, -1, 0).finished(); }
inline Eigen::Matrix2cd y() {
  return (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished();
}
inline Eigen::Matrix2d z() { return (Eigen::Matrix2d() << 1, 0, 0, -1).finished(); }
inline Eigen::Matrix2d identity() { return Eigen::Matrix2d::Identity(); }
/// sigma^+ = (sigma^x + i sigma^y)/2 = |up><down|.
inline Eigen::Matrix2d plus() { return (Eigen::Matrix2d() << 0, 1, 0, 0).finished(); }
}  // namespace pauli

/// -sum p ln p over eigenvalues; entries below 1e-14 contribute nothing.
double entropy_of_spectrum(const VectorXd& probabilities);

/// Von Neumann entropy of a Hermitian density matrix.
double von_neumann_entropy(const MatrixXc& rho);

/// Largest |A - A^dagger| entry.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace qme
