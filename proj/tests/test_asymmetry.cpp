#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qme/asymmetry.hpp"
#include "qme/error.hpp"
#include "qme/states.hpp"

using namespace qme;
using doctest::Approx;

TEST_CASE("U(1) projector structure") {
  const auto one = build_u1_projectors(1);
  REQUIRE(one.sectors.size() == 2);
  CHECK(one.sectors[0].eigenvalue == 1.0);
  CHECK(one.sectors[1].eigenvalue == -1.0);
  const auto two = build_u1_projectors(2);
  REQUIRE(two.sectors.size() == 3);
  CHECK(two.sectors[0].rank == 1);
  CHECK(two.sectors[1].rank == 2);
  CHECK(two.sectors[2].rank == 1);
  const auto four = build_u1_projectors(4);
  std::vector<int> ranks;
  for (const auto& s : four.sectors) ranks.push_back(s.rank);
  CHECK(ranks == std::vector<int>{1, 4, 6, 4, 1});
  MatrixXd sum = MatrixXd::Zero(16, 16);
  for (const auto& s : four.sectors) sum += s.projector;
  CHECK((sum - MatrixXd::Identity(16, 16)).norm() < 1e-14);
}

TEST_CASE("SU(2) projector structure") {
  const auto one = build_su2_projectors(1);
  REQUIRE(one.sectors.size() == 1);
  CHECK(one.sectors[0].eigenvalue == Approx(3.0));
  const auto two = build_su2_projectors(2);
  REQUIRE(two.sectors.size() == 2);
  CHECK(two.sectors[0].eigenvalue == Approx(8.0));
  CHECK(two.sectors[0].rank == 3);
  CHECK(two.sectors[1].rank == 1);
  const auto four = build_su2_projectors(4);
  REQUIRE(four.sectors.size() == 3);
  CHECK(four.sectors[0].label == Approx(2.0));
  CHECK(four.sectors[0].rank == 5);
  CHECK(four.sectors[1].rank == 9);
  CHECK(four.sectors[2].rank == 2);
  for (const auto& a : four.sectors)
    for (const auto& b : four.sectors) {
      const MatrixXd prod = a.projector * b.projector;
      if (&a == &b)
        CHECK((prod - a.projector).norm() < 1e-10);
      else
        CHECK(prod.norm() < 1e-10);
    }
  CHECK_THROWS(build_projectors(Symmetry::U1, kMaxSubsystem + 1));
}

TEST_CASE("asymmetry is non-negative on random density matrices") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const int na = 1 + trial % 4;
    const MatrixXc rho = oracle::random_density_matrix(1 << na, rng, 1 + trial % (1 << na));
    const double u1 = entanglement_asymmetry(rho, build_u1_projectors(na));
    CHECK(u1 >= 0.0);
    CHECK(u1 == Approx(oracle::u1_asymmetry(rho)).epsilon(1e-9).scale(1.0));
    CHECK(entanglement_asymmetry(rho, build_su2_projectors(na)) >= 0.0);
  }
}

TEST_CASE("asymmetry vanishes exactly for charge-commuting states") {
  std::mt19937 rng(99);
  for (int na = 1; na <= 4; ++na) {
    const auto u1 = build_u1_projectors(na);
    const MatrixXc rho = dephase(oracle::random_density_matrix(1 << na, rng), u1);
    CHECK(std::abs(entanglement_asymmetry(rho, u1)) <= 1e-10);
    MatrixXc q = MatrixXc::Zero(1 << na, 1 << na);
    for (const auto& s : u1.sectors) q += s.eigenvalue * s.projector.cast<cplx>();
    CHECK((rho * q - q * rho).norm() < 1e-12);
  }
}

TEST_CASE("single tilted spin at pi/4 has asymmetry ln 2") {
  const VectorXc psi = build_tilted_product(std::numbers::pi / 4, 1);
  const MatrixXc rho = psi * psi.adjoint();
  CHECK(entanglement_asymmetry(rho, build_u1_projectors(1)) == Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("tilted product states are SU(2) symmetric") {
  for (double th : {0.0, 0.2, std::numbers::pi / 8, std::numbers::pi / 4, 1.0}) {
    const VectorXc psi = build_tilted_product(th, 4);
    const MatrixXc rho = psi * psi.adjoint();
    CHECK(std::abs(entanglement_asymmetry(rho, build_su2_projectors(4))) < 1e-10);
  }
  // Tilted Neel states are not.
  const VectorXc neel = build_tilted_neel(std::numbers::pi / 4, 4);
  CHECK(entanglement_asymmetry(neel * neel.adjoint(), build_su2_projectors(4)) > 0.1);
}

TEST_CASE("trace distance properties") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXc a = oracle::random_density_matrix(8, rng);
    const MatrixXc b = oracle::random_density_matrix(8, rng);
    const MatrixXc c = oracle::random_density_matrix(8, rng);
    CHECK(trace_distance(a, a) < 1e-12);
    CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12);
    const Eigen::HouseholderQR<MatrixXc> qr(oracle::random_density_matrix(8, rng, 8) + MatrixXc::Identity(8, 8));
    const MatrixXc u = qr.householderQ();
    CHECK(trace_distance(u * a * u.adjoint(), u * b * u.adjoint()) == Approx(trace_distance(a, b)).epsilon(1e-10));
    CHECK(trace_distance(a, b) <= 1.0);
  }
  VectorXc x = VectorXc::Zero(2), y = VectorXc::Zero(2);
  x(0) = 1.0;
  y(1) = 1.0;
  CHECK(trace_distance(x * x.adjoint(), y * y.adjoint()) == Approx(1.0));
}

TEST_CASE("invalid density matrices are rejected") {
  MatrixXc bad = MatrixXc::Identity(2, 2);
  CHECK_THROWS_AS(entanglement_asymmetry(bad, build_u1_projectors(1)), DomainError);
  MatrixXc neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(check_density_matrix(neg), DomainError);
}
