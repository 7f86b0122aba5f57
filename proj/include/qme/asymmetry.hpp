#pragma once

#include <string>
#include <vector>

#include "qme/linalg.hpp"

namespace qme {

enum class Symmetry { U1, SU2 };

std::string to_string(Symmetry s);

struct ChargeSector {
  /// Eigenvalue of the subsystem charge: total sigma^z for U(1), the Casimir
  /// sum_nu (sum_i sigma^nu_i)^2 = 4S(S+1) for SU(2).
  double eigenvalue = 0.0;
  /// sigma^z charge for U(1); total spin S for SU(2).
  double label = 0.0;
  int rank = 0;
  MatrixXd projector;
  /// Basis indices of the sector when the projector is diagonal (U(1) only).
  std::vector<int> indices;
};

struct ChargeDecomposition {
  Symmetry symmetry = Symmetry::U1;
  int n_a = 0;
  std::vector<ChargeSector> sectors;  // ordered by decreasing eigenvalue
  int dimension() const { return 1 << n_a; }
};

/// Subsystem sizes up to this many sites are supported.
inline constexpr int kMaxSubsystem = 6;

ChargeDecomposition build_u1_projectors(int n_a);

/// Numerical diagonalisation of the Casimir; eigenvalues grouped within 1e-8.
ChargeDecomposition build_su2_projectors(int n_a);

ChargeDecomposition build_projectors(Symmetry s, int n_a);

/// sum_q P_q rho P_q
MatrixXc dephase(const MatrixXc& rho, const ChargeDecomposition& decomp);

/// S(dephased rho) - S(rho) in nats. Negative values down to -1e-10 are
/// returned as 0; anything lower raises ConsistencyError.
double entanglement_asymmetry(const MatrixXc& rho, const ChargeDecomposition& decomp);

/// (1/2) || rho - sigma ||_1
double trace_distance(const MatrixXc& rho, const MatrixXc& sigma);

/// DomainError unless rho is Hermitian with unit trace and no eigenvalue
/// below -tol.
void check_density_matrix(const MatrixXc& rho, double tol = 1e-10);

}  // namespace qme
