#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "qme/ed.hpp"
#include "qme/error.hpp"
#include "qme/states.hpp"

using namespace qme;
using doctest::Approx;

namespace {
ModelSpec xyz(int n, double alpha, double h) {
  ModelSpec s;
  s.n = n;
  s.alpha = alpha;
  s.jx = -0.5;
  s.jy = -1.5;
  s.jz = -0.75;
  s.hz = h;
  return s;
}

// Ground energy of the 12-site XXZ chain (alpha = 2, J_x = J_y = -1,
// J_z = -0.75, open boundaries). Regression value from dense
// diagonalisation; the Hamiltonian itself is checked against the Kronecker
// oracle on smaller chains.
constexpr double kGround12 = -5.6706454573520;
}  // namespace

TEST_CASE("small Hamiltonians") {
  ModelSpec one;
  one.n = 1;
  one.hz = 1.3;
  const MatrixXd h1 = build_dense_hamiltonian(one);
  CHECK(h1(0, 0) == Approx(1.3));
  CHECK(h1(1, 1) == Approx(-1.3));
  const auto b1 = spectrum_bounds(one);
  CHECK(b1.first == Approx(-1.3));
  CHECK(b1.second == Approx(1.3));

  ModelSpec two;
  two.n = 2;
  two.jx = two.jy = 0.0;
  two.jz = -0.75;
  const auto b2 = spectrum_bounds(two);
  CHECK(b2.first == Approx(-0.375));
  CHECK(b2.second == Approx(0.375));
}

TEST_CASE("dimer spectrum") {
  ModelSpec s;
  s.n = 2;
  s.jx = s.jy = -1.0;
  s.jz = -0.75;
  s.hz = 0.2;
  const Spectrum sp = diagonalize(build_dense_hamiltonian(s));
  std::vector<double> expect = {-0.375 + 0.4, -0.375 - 0.4, (0.75 + 2.0) / 2, (0.75 - 2.0) / 2};
  std::sort(expect.begin(), expect.end());
  for (int k = 0; k < 4; ++k) CHECK(sp.values(k) == Approx(expect[k]).epsilon(1e-14));
}

TEST_CASE("Hamiltonian matches the Kronecker oracle") {
  for (int n : {3, 6}) {
    const ModelSpec s = xyz(n, 1.5, 0.7);
    const MatrixXd dense = build_dense_hamiltonian(s);
    const oracle::MatC ref = oracle::hamiltonian(n, 1.5, -0.5, -1.5, -0.75, 0.7);
    CHECK((dense.cast<cplx>() - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((dense - dense.transpose()).norm() == 0.0);
    const SparseMatrixD sparse = build_sparse_hamiltonian(s);
    CHECK((MatrixXd(sparse) - dense).norm() < 1e-13);
  }
}

TEST_CASE("resource limits") {
  ModelSpec s = xyz(13, 2.0, 0.0);
  CHECK_THROWS_AS(build_dense_hamiltonian(s), ResourceError);
  s.n = 17;
  CHECK_THROWS_AS(build_sparse_hamiltonian(s), ResourceError);
}

TEST_CASE("ground energy of the 12-site XXZ chain") {
  ModelSpec s;
  s.n = 12;
  s.alpha = 2.0;
  s.jz = -0.75;
  s.variant = Variant::DEffective;
  const auto b = spectrum_bounds(s);
  CHECK(b.first == Approx(kGround12).epsilon(1e-11));
}

TEST_CASE("product-state energy") {
  // <H> of a uniform tilted product under the XXZ generator is
  // (N-1)/2 (J_x sin^2 2theta + J_z cos^2 2theta) for any alpha.
  for (double th : {0.0, std::numbers::pi / 8, std::numbers::pi / 4}) {
    ModelSpec s;
    s.n = 8;
    s.alpha = 1.7;
    s.variant = Variant::DEffective;
    const double e = expectation(build_sparse_hamiltonian(s), build_tilted_product(th, 8));
    const double expect = 3.5 * (-std::pow(std::sin(2 * th), 2) - 0.75 * std::pow(std::cos(2 * th), 2));
    CHECK(e == Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("exact evolution: spectral and Krylov agree with the oracle") {
  const ModelSpec s = xyz(6, 2.0, 1.0);
  const SparseMatrixD h = build_sparse_hamiltonian(s);
  const Spectrum sp = diagonalize(MatrixXd(h));
  const VectorXc psi0 = build_tilted_product(0.4, 6);
  const oracle::MatC H = oracle::hamiltonian(6, 2.0, -0.5, -1.5, -0.75, 1.0);
  const std::vector<double> grid = {0.0, 0.5, 1.3, 4.0};
  std::vector<VectorXc> spectral, krylov;
  evolve_exact(psi0, h, grid, [&](double, const VectorXc& p) { spectral.push_back(p); }, &sp);
  evolve_exact(psi0, h, grid, [&](double, const VectorXc& p) { krylov.push_back(p); });
  REQUIRE(spectral.size() == 4);
  REQUIRE(krylov.size() == 4);
  for (int k = 0; k < 4; ++k) {
    const VectorXc ref = oracle::evolve(H, psi0, grid[k]);
    CHECK((spectral[k] - ref).norm() < 1e-10);
    CHECK((krylov[k] - ref).norm() < 1e-8);
  }
}

TEST_CASE("energy is conserved and field-only dynamics keep populations") {
  const ModelSpec s = xyz(8, 1.5, 2.0);
  const SparseMatrixD h = build_sparse_hamiltonian(s);
  const VectorXc psi0 = build_tilted_neel(0.5, 8);
  const double e0 = expectation(h, psi0);
  evolve_exact(psi0, h, {0.0, 1.0, 2.0, 5.0},
               [&](double, const VectorXc& p) { CHECK(expectation(h, p) == Approx(e0).epsilon(1e-10)); });

  ModelSpec field;
  field.n = 5;
  field.jx = field.jy = field.jz = 0.0;
  field.hz = 1.7;
  const SparseMatrixD hf = build_sparse_hamiltonian(field);
  const VectorXc p0 = build_tilted_product(0.3, 5);
  evolve_exact(p0, hf, {0.0, 0.7, 3.1}, [&](double, const VectorXc& p) {
    for (int i = 0; i < 5; ++i)
      CHECK(site_expectation(p, i, oracle::sz()).real() == Approx(std::cos(0.6)).epsilon(1e-10));
  });
}

TEST_CASE("reduced density matrices") {
  const VectorXc prod = build_tilted_product(0.3, 6);
  const MatrixXc r = reduced_density_matrix(prod, 2, 3);
  CHECK((r * r - r).norm() < 1e-13);
  CHECK(r.trace().real() == Approx(1.0));

  VectorXc bell = VectorXc::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  CHECK(oracle::entropy(reduced_density_matrix(bell, 0, 1)) == Approx(std::log(2.0)));

  const ModelSpec s = xyz(8, 2.0, 0.5);
  const oracle::MatC H = oracle::hamiltonian(8, 2.0, -0.5, -1.5, -0.75, 0.5);
  const VectorXc psi = oracle::evolve(H, build_tilted_product(0.5, 8), 1.5);
  for (int first : {0, 2, 5}) {
    const MatrixXc a = reduced_density_matrix(psi, first, 3);
    CHECK((a - oracle::partial_trace(psi, 8, first, 3)).norm() < 1e-13);
    CHECK((a - a.adjoint()).norm() < 1e-14);
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXc>(a).eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("effective temperature") {
  const ModelSpec s = xyz(6, 2.0, 0.8);
  const Spectrum sp = diagonalize(build_dense_hamiltonian(s));
  const double mean = sp.values.mean();
  const ThermalState inf = solve_effective_temperature(sp, mean);
  CHECK(inf.beta == 0.0);
  for (double frac : {0.1, 0.3, 0.7, 0.95}) {
    const double e = sp.values(0) + frac * (sp.values(sp.values.size() - 1) - sp.values(0));
    const ThermalState th = solve_effective_temperature(sp, e);
    CHECK(th.residual < 1e-10);
    CHECK(thermal_energy(sp.values, th.beta) == Approx(e).epsilon(1e-10));
    CHECK((th.beta > 0) == (e < mean));
    const MatrixXc rho = thermal_reduced_density_matrix(sp, th, 1, 3);
    CHECK(rho.trace().real() == Approx(1.0).epsilon(1e-12));
  }
  const ThermalState edge = solve_effective_temperature(sp, sp.values(0) + 1e-14);
  CHECK(edge.beta > 10.0);
  CHECK(edge.residual < 1e-12);
  CHECK_FALSE(edge.saturated);
  CHECK_THROWS_AS(solve_effective_temperature(sp, sp.values(0) - 1.0), DomainError);
}
