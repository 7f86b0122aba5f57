#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qme/ed.hpp"
#include "qme/longrange.hpp"

using namespace qme;
using doctest::Approx;

TEST_CASE("single exponential target is recovered exactly") {
  std::vector<double> target(40);
  for (int n = 0; n < 40; ++n) target[n] = 0.7 * std::exp(-0.3 * n);
  const ExponentialFit f = fit_exponential_sum(target, 1);
  CHECK(f.sup_residual < 1e-12);
  CHECK(f.amplitudes[0] == Approx(0.7).epsilon(1e-12));
  CHECK(f.rates[0] == Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("power-law fit quality and monotonicity in K") {
  const ExponentialFit f1 = fit_power_law(1.0, 100, 8);
  CHECK(f1.sup_residual < 1e-4);
  CHECK_FALSE(f1.warning);

  double previous = 1e300;
  for (int k = 1; k <= 6; ++k) {
    const ExponentialFit f = fit_power_law(2.0, 60, k, {1.0, 1.0});
    CHECK(f.sup_residual <= previous * (1.0 + 1e-12));
    previous = f.sup_residual;
    for (double b : f.rates) CHECK(b < 0.0);
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("fit rejects invalid input") {
  CHECK_THROWS(fit_power_law(-1.0, 50, 4));
  CHECK_THROWS(fit_power_law(2.0, 2, 4));
}

TEST_CASE("fit table round trip") {
  const ExponentialFit f = fit_power_law(3.0, 40, 4);
  std::stringstream ss;
  write_fit_table(ss, f);
  const ExponentialFit g = read_fit_table(ss);
  REQUIRE(g.terms() == f.terms());
  for (int k = 0; k < f.terms(); ++k) {
    CHECK(g.amplitudes[k] == Approx(f.amplitudes[k]).epsilon(1e-11));
    CHECK(g.rates[k] == Approx(f.rates[k]).epsilon(1e-11));
  }
  for (int n = 0; n < 39; ++n) CHECK(g.evaluate(n) == Approx(f.evaluate(n)).epsilon(1e-10));
}

TEST_CASE("two-site MPO equals the dense dimer") {
  ModelSpec s;
  s.n = 2;
  s.jx = -0.5;
  s.jy = -1.5;
  s.jz = -0.75;
  s.hz = 0.3;
  const Mpo mpo = build_model_mpo(s);
  const Eigen::MatrixXd dense = mpo_to_dense(mpo);
  const oracle::MatC ref = oracle::hamiltonian(2, 2.0, -0.5, -1.5, -0.75, 0.3);
  CHECK((dense.cast<cplx>() - ref).norm() < 1e-12);
}

TEST_CASE("assembled MPO reproduces the fitted-weight Hamiltonian") {
  ModelSpec s;
  s.n = 10;
  s.alpha = 2.0;
  s.jx = -0.5;
  s.jy = -1.5;
  s.jz = -0.75;
  s.hz = 5.0;
  const ExponentialFit fit = fit_power_law(2.0, 10, 8);
  const Mpo mpo = assemble_longrange_mpo(fit, s);
  CHECK(mpo.bond_dimension() == 2 + 3 * fit.terms());
  const Eigen::MatrixXd dense = mpo_to_dense(mpo);
  const Eigen::MatrixXd fitted = build_dense_hamiltonian(fitted_coupling_table(fit, s), 10);
  CHECK((dense - fitted).cwiseAbs().maxCoeff() < 1e-10);

  // Against the exact power law: bounded by the fit residual times the
  // number of bonds and the coupling scale.
  const oracle::MatC exact = oracle::hamiltonian(10, 2.0, -0.5, -1.5, -0.75, 5.0);
  const double bound = fit.sup_residual * 45 * 2.75 / kac_norm(2.0, 10);
  const double diff = (dense.cast<cplx>() - exact).operatorNorm();
  CHECK(diff <= bound + 1e-12);
}

TEST_CASE("K = 8 MPO has bulk bond dimension 26") {
  ModelSpec s;
  s.n = 30;
  s.alpha = 1.5;
  CHECK(build_model_mpo(s, 8).bond_dimension() == 26);
}

TEST_CASE("nearest-neighbour MPO") {
  ModelSpec s;
  s.n = 6;
  s.nearest_neighbor = true;
  s.jz = -0.75;
  const Eigen::MatrixXd dense = mpo_to_dense(build_model_mpo(s));
  const Eigen::MatrixXd ed = build_dense_hamiltonian(s);
  CHECK((dense - ed).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("fidelity report flags distant errors") {
  ModelSpec s;
  s.n = 100;
  s.alpha = 3.0;
  const ExponentialFit fit = fit_power_law(3.0, 100, 8);
  const FidelityReport r = mpo_fidelity_report(fit, s, 1e-4);
  CHECK(r.max_error < 1e-4);
  CHECK(r.flagged.empty());
  CHECK(r.distance_error.size() == 99);

  const ExponentialFit coarse = fit_power_law(1.5, 200, 2, {1.0, 1.0});
  ModelSpec s2 = s;
  s2.n = 200;
  s2.alpha = 1.5;
  const FidelityReport r2 = mpo_fidelity_report(coarse, s2, 1e-4);
  CHECK_FALSE(r2.flagged.empty());
  CHECK(r2.max_error == Approx(coarse.sup_residual));
}
