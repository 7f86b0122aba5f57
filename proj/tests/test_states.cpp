#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "qme/error.hpp"
#include "qme/ed.hpp"
#include "qme/states.hpp"

using namespace qme;
using doctest::Approx;
constexpr double pi = std::numbers::pi;

namespace {
double sz_at(const VectorXc& psi, int i) {
  return site_expectation(psi, i, oracle::sz()).real();
}
}  // namespace

TEST_CASE("tilted product states") {
  const VectorXc up = build_tilted_product(0.0, 4);
  CHECK(std::abs(up(0)) == Approx(1.0));
  for (double th : {0.1, pi / 8, pi / 4, 1.2}) {
    const VectorXc psi = build_tilted_product(th, 5);
    CHECK(psi.norm() == Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 5; ++i) CHECK(sz_at(psi, i) == Approx(std::cos(2 * th)).epsilon(1e-13));
  }
  const VectorXc plus = build_tilted_product(pi / 4, 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(sz_at(plus, i)) < 1e-14);
}

TEST_CASE("tilted product matches the oracle construction") {
  const double th = 0.3;
  std::vector<Eigen::Vector2cd> sites(4, Eigen::Vector2cd(std::cos(th), -std::sin(th)));
  CHECK((build_tilted_product(th, 4) - oracle::product(sites)).norm() < 1e-14);
}

TEST_CASE("tilted Neel states") {
  const VectorXc up = build_tilted_neel(0.0, 4);
  CHECK(std::abs(up(0)) == Approx(1.0));
  const VectorXc neel = build_tilted_neel(pi / 2, 4);
  // Sites 1 and 3 flipped: index 0b1010.
  CHECK(std::abs(neel(0b1010)) == Approx(1.0));
  const VectorXc half = build_tilted_neel(pi / 4, 2);
  CHECK(sz_at(half, 0) == Approx(1.0));
  CHECK(std::abs(sz_at(half, 1)) < 1e-14);
}

TEST_CASE("state validation") {
  InitialStateSpec s{StateFamily::TiltedNeel, 0.3, 5};
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.n = 4;
  s.angle = 2.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.angle = -0.1;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("angle parsing") {
  CHECK(parse_angle("pi/4") == Approx(pi / 4));
  CHECK(parse_angle("3pi/8") == Approx(3 * pi / 8));
  CHECK(parse_angle("0.5*pi") == Approx(pi / 2));
  CHECK(parse_angle("pi") == Approx(pi));
  CHECK(parse_angle("0.25") == Approx(0.25));
  CHECK_THROWS(parse_angle("tau/2"));
  CHECK(angle_from_json(nlohmann::json("pi/8")) == Approx(pi / 8));
}

TEST_CASE("state json") {
  const InitialStateSpec s = state_from_json({{"family", "neel"}, {"angle", "pi/8"}}, 6);
  CHECK(s.family == StateFamily::TiltedNeel);
  CHECK(s.n == 6);
  const InitialStateSpec r = state_from_json(to_json(s));
  CHECK(r.angle == s.angle);
  CHECK_THROWS_AS(state_from_json({{"family", "ghz"}, {"angle", 0.1}}, 4), ConfigError);
  CHECK_THROWS_AS(state_from_json({{"family", "product"}}, 4), ConfigError);
}

TEST_CASE("initial asymmetry grows with the tilt angle") {
  const auto p = initial_asymmetry_monotonicity_check(StateFamily::TiltedProduct, {0.0, pi / 8, pi / 4}, 1);
  const double c2 = std::pow(std::cos(pi / 8), 2);
  CHECK(p.asymmetry[0] == Approx(0.0));
  CHECK(p.asymmetry[1] == Approx(-c2 * std::log(c2) - (1 - c2) * std::log(1 - c2)).epsilon(1e-12));
  CHECK(p.asymmetry[2] == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(p.non_decreasing);

  const auto n = initial_asymmetry_monotonicity_check(StateFamily::TiltedNeel, {pi / 8, pi / 4}, 4);
  CHECK(n.non_decreasing);
  CHECK(n.asymmetry[1] > n.asymmetry[0]);
  // Independent check on the product-state oracle.
  const VectorXc psi = build_tilted_neel(pi / 4, 4);
  CHECK(n.asymmetry[1] == Approx(oracle::u1_asymmetry(oracle::partial_trace(psi, 4, 0, 4))).epsilon(1e-10));
}
