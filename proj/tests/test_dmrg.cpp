#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qme/dmrg.hpp"
#include "qme/ed.hpp"
#include "qme/longrange.hpp"

using namespace qme;
using doctest::Approx;

TEST_CASE("dimer ground energy") {
  ModelSpec s;
  s.n = 2;
  s.variant = Variant::DEffective;
  const DmrgResult r = dmrg_ground_state(build_model_mpo(s));
  // Triplet m = 0 state: (1/2)(-2 + 0.75).
  CHECK(r.energy == Approx(-0.625).epsilon(1e-12));
}

TEST_CASE("DMRG agrees with exact diagonalisation") {
  ModelSpec s;
  s.n = 10;
  s.alpha = 2.0;
  s.jz = -0.75;
  s.variant = Variant::DEffective;
  const ExponentialFit fit = fit_power_law(2.0, 10, 8);
  DmrgOptions o;
  o.chi_max = 64;
  const DmrgResult r = dmrg_ground_state(assemble_longrange_mpo(fit, s), o);
  const double e_fit = spectrum_bounds(build_sparse_hamiltonian(fitted_coupling_table(fit, s), 10)).first;
  CHECK(r.converged);
  CHECK(r.energy == Approx(e_fit).epsilon(1e-9));
  CHECK(mpo_expectation(r.state, assemble_longrange_mpo(fit, s)) == Approx(r.energy).epsilon(1e-10));
  const double e_exact = spectrum_bounds(s).first;
  CHECK(std::abs(r.energy - e_exact) < 1e-5);
  CHECK(r.sweep_energies.size() >= 2);
}

TEST_CASE("XYZ with field") {
  ModelSpec s;
  s.n = 8;
  s.alpha = 1.5;
  s.jx = -0.5;
  s.jy = -1.5;
  s.jz = -0.75;
  s.hz = 0.4;
  const Mpo mpo = build_model_mpo(s);
  DmrgOptions o;
  o.chi_max = 32;
  const DmrgResult r = dmrg_ground_state(mpo, o);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mpo_to_dense(mpo));
  CHECK(r.energy == Approx(es.eigenvalues()(0)).epsilon(1e-10));
}
