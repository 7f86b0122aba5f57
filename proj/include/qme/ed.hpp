#pragma once

#include <functional>
#include <vector>

#include <Eigen/SparseCore>

#include "qme/linalg.hpp"
#include "qme/model.hpp"

namespace qme {

using SparseMatrixD = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct EdLimits {
  /// Largest chain for sparse operators and Krylov evolution.
  int sparse_cap = 16;
  /// Largest chain for dense matrices and full diagonalisation.
  int dense_cap = 12;
};

/// Real symmetric Hamiltonian from an explicit coupling table (bit i = site i,
/// bit value 0 = up). Useful for fitted weights.
SparseMatrixD build_sparse_hamiltonian(const CouplingTable& table, int n, const EdLimits& limits = {});
SparseMatrixD build_sparse_hamiltonian(const ModelSpec& spec, const EdLimits& limits = {});
MatrixXd build_dense_hamiltonian(const ModelSpec& spec, const EdLimits& limits = {});
MatrixXd build_dense_hamiltonian(const CouplingTable& table, int n, const EdLimits& limits = {});

/// y = H x for complex vectors.
void apply(const SparseMatrixD& h, const VectorXc& x, VectorXc& y);

/// <psi|H|psi> / <psi|psi>
double expectation(const SparseMatrixD& h, const VectorXc& psi);

struct Spectrum {
  VectorXd values;   // ascending
  MatrixXd vectors;  // columns
};

/// Full diagonalisation; DomainError if the matrix is not symmetric.
Spectrum diagonalize(const MatrixXd& h);

/// Extremal eigenvalues (E_min, E_max): dense for n <= dense_cap, Lanczos beyond.
std::pair<double, double> spectrum_bounds(const ModelSpec& spec, const EdLimits& limits = {});
std::pair<double, double> spectrum_bounds(const SparseMatrixD& h);

/// Evolves psi0 to each time in `t_grid` (ascending, starting at or after 0)
/// and calls `observe(t, psi)`. Uses the spectral decomposition when given,
/// Krylov steps between grid points otherwise.
struct EvolutionOptions {
  int krylov_dim = 30;
  double krylov_tol = 1e-10;
};
void evolve_exact(const VectorXc& psi0, const SparseMatrixD& h, const std::vector<double>& t_grid,
                  const std::function<void(double, const VectorXc&)>& observe,
                  const Spectrum* spectral = nullptr, const EvolutionOptions& opts = {});

/// exp(-i H t) psi from a spectral decomposition.
VectorXc evolve_spectral(const Spectrum& spec, const VectorXc& psi, double t);

/// Partial trace onto sites [first, first + count).
MatrixXc reduced_density_matrix(const VectorXc& psi, int first, int count);

/// Single-site expectation <psi|op_i|psi> for a 2x2 operator.
cplx site_expectation(const VectorXc& psi, int site, const Eigen::Matrix2cd& op);

struct ThermalState {
  double beta = 0.0;
  double target_energy = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  /// Target sits so close to an edge that beta hit the bracketing limit.
  bool saturated = false;
  VectorXd weights;  // Boltzmann weights on the eigenbasis of the spectrum used
};

/// Thermal energy Tr(H e^{-beta H}) / Tr(e^{-beta H}).
double thermal_energy(const VectorXd& energies, double beta);

/// Bracketing from beta = +-1 (doubling) followed by bisection until the
/// energy residual is below `tol`. DomainError for E outside (E_min, E_max).
ThermalState solve_effective_temperature(const Spectrum& spec, double energy, double tol = 1e-10);

/// sum_k p_k Tr_B |k><k| on sites [first, first + count).
MatrixXc thermal_reduced_density_matrix(const Spectrum& spec, const ThermalState& th, int first, int count);

}  // namespace qme
