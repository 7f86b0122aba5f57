#include "qme/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qme {

double entropy_of_spectrum(const VectorXd& probabilities) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const MatrixXc& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

}  // namespace qme
