#include "qme/asymmetry.hpp"

#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qme/error.hpp"

namespace qme {

std::string to_string(Symmetry s) { return s == Symmetry::U1 ? "U1" : "SU2"; }

namespace {

void check_size(int n_a) {
  if (n_a < 1 || n_a > kMaxSubsystem)
    throw DomainError("subsystem size must lie in [1, " + std::to_string(kMaxSubsystem) + "]");
}

// Total sum_i op_i on n_a sites (bit i = site i).
MatrixXd total_operator(const Eigen::Matrix2d& op, int n_a) {
  const int dim = 1 << n_a;
  MatrixXd out = MatrixXd::Zero(dim, dim);
  for (int x = 0; x < dim; ++x)
    for (int i = 0; i < n_a; ++i) {
      const int s = (x >> i) & 1;
      for (int sp = 0; sp < 2; ++sp) {
        const double c = op(sp, s);
        if (c != 0.0) out((x & ~(1 << i)) | (sp << i), x) += c;
      }
    }
  return out;
}

}  // namespace

ChargeDecomposition build_u1_projectors(int n_a) {
  check_size(n_a);
  ChargeDecomposition d;
  d.symmetry = Symmetry::U1;
  d.n_a = n_a;
  const int dim = 1 << n_a;
  for (int down = 0; down <= n_a; ++down) {
    ChargeSector sec;
    sec.eigenvalue = sec.label = n_a - 2 * down;
    sec.projector = MatrixXd::Zero(dim, dim);
    for (int x = 0; x < dim; ++x)
      if (std::popcount(static_cast<unsigned>(x)) == down) {
        sec.projector(x, x) = 1.0;
        sec.indices.push_back(x);
      }
    sec.rank = static_cast<int>(sec.indices.size());
    d.sectors.push_back(std::move(sec));
  }
  return d;
}

ChargeDecomposition build_su2_projectors(int n_a) {
  check_size(n_a);
  const MatrixXd sx = total_operator(pauli::x(), n_a);
  const MatrixXd isy = total_operator(pauli::iy(), n_a);
  const MatrixXd sz = total_operator(pauli::z(), n_a);
  const MatrixXd casimir = sx * sx - isy * isy + sz * sz;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(casimir);
  const VectorXd& ev = es.eigenvalues();
  constexpr double tol = 1e-8;
  ChargeDecomposition d;
  d.symmetry = Symmetry::SU2;
  d.n_a = n_a;
  // Eigenvalues are ascending; collect clusters, then emit in decreasing order.
  std::vector<std::pair<int, int>> clusters;
  int start = 0;
  for (int k = 1; k <= ev.size(); ++k) {
    if (k == ev.size() || ev(k) - ev(k - 1) > tol) {
      if (ev(k - 1) - ev(start) > tol) throw ConsistencyError("SU(2) Casimir eigenvalue clusters overlap");
      clusters.emplace_back(start, k);
      start = k;
    }
  }
  for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
    const auto [lo, hi] = *it;
    ChargeSector sec;
    sec.eigenvalue = ev.segment(lo, hi - lo).mean();
    sec.label = 0.5 * (std::sqrt(1.0 + sec.eigenvalue) - 1.0);
    sec.rank = hi - lo;
    const MatrixXd v = es.eigenvectors().middleCols(lo, hi - lo);
    sec.projector = v * v.transpose();
    d.sectors.push_back(std::move(sec));
  }
  return d;
}

ChargeDecomposition build_projectors(Symmetry s, int n_a) {
  return s == Symmetry::U1 ? build_u1_projectors(n_a) : build_su2_projectors(n_a);
}

MatrixXc dephase(const MatrixXc& rho, const ChargeDecomposition& decomp) {
  if (rho.rows() != decomp.dimension() || rho.cols() != decomp.dimension())
    throw DomainError("density matrix does not match the subsystem size");
  MatrixXc out = MatrixXc::Zero(rho.rows(), rho.cols());
  for (const auto& sec : decomp.sectors) {
    if (!sec.indices.empty()) {
      for (int a : sec.indices)
        for (int b : sec.indices) out(a, b) = rho(a, b);
    } else {
      const MatrixXc p = sec.projector.cast<cplx>();
      out.noalias() += p * rho * p;
    }
  }
  return out;
}

void check_density_matrix(const MatrixXc& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw DomainError("density matrix must be square");
  if (hermiticity_defect(rho) > tol) throw DomainError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > tol) throw DomainError("density matrix does not have unit trace");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -tol) throw DomainError("density matrix is not positive semidefinite");
}

double entanglement_asymmetry(const MatrixXc& rho, const ChargeDecomposition& decomp) {
  check_density_matrix(rho);
  const double delta = von_neumann_entropy(dephase(rho, decomp)) - von_neumann_entropy(rho);
  if (delta < -1e-10) throw ConsistencyError("entanglement asymmetry is significantly negative");
  return delta < 0.0 ? 0.0 : delta;
}

double trace_distance(const MatrixXc& rho, const MatrixXc& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw DomainError("trace distance needs matrices of equal size");
  const MatrixXc diff = rho - sigma;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qme
