#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "qme/error.hpp"
#include "qme/model.hpp"

using namespace qme;
using doctest::Approx;

TEST_CASE("kac norm closed values") {
  for (double a : {0.0, 0.5, 2.0, 6.0}) CHECK(kac_norm(a, 2) == 2.0);
  CHECK(kac_norm(0.0, 10) == 10.0);
  CHECK(kac_norm(1.0, 3) == Approx(2.5).epsilon(1e-15));
  CHECK(kac_norm(std::numeric_limits<double>::infinity(), 7) == 2.0);
  CHECK_THROWS_AS(kac_norm(2.0, 1), DomainError);
}

TEST_CASE("kac norm matches direct summation") {
  for (int n : {3, 8, 33})
    for (double a : {0.7, 1.5, 3.0}) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) s += std::pow(std::abs(i - j), -a);
      CHECK(kac_norm(a, n) == Approx(s / (n - 1)).epsilon(1e-13));
    }
}

TEST_CASE("coupling table weights and variants") {
  ModelSpec s;
  s.n = 6;
  s.alpha = 0.0;
  auto t = build_coupling_table(s);
  for (int d = 1; d < 6; ++d) CHECK(t.weight(d) == Approx(t.weight(1)));

  s.alpha = 2.0;
  t = build_coupling_table(s);
  for (int d = 1; d < 6; ++d) CHECK(t.weight(d) == Approx(1.0 / (t.norm * d * d)));

  ModelSpec nn;
  nn.n = 5;
  nn.nearest_neighbor = true;
  t = build_coupling_table(nn);
  CHECK(t.weight(1) == 0.5);
  for (int d = 2; d < 5; ++d) CHECK(t.weight(d) == 0.0);

  ModelSpec d;
  d.jx = -0.5;
  d.jy = -1.5;
  d.hz = 3.0;
  d.variant = Variant::DEffective;
  CHECK(d.axis_couplings()[0] == -1.0);
  CHECK(d.axis_couplings()[1] == -1.0);
  CHECK(d.field() == 0.0);
  d.variant = Variant::DPlusField;
  CHECK(d.field() == 3.0);
  d.variant = Variant::XyzFull;
  CHECK(d.axis_couplings()[0] == -0.5);
  CHECK(d.prethermal_generator().variant == Variant::DEffective);
  CHECK(d.prethermal_generator().axis_couplings()[1] == -1.0);
}

TEST_CASE("model validation") {
  ModelSpec s;
  s.alpha = -1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.alpha = 1.0;
  s.n = 0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("closed-form energy densities") {
  const double pi = std::numbers::pi;
  CHECK(energy_density_tilted_product(pi / 4, -1.0, -0.75) == Approx(-0.5).epsilon(1e-14));
  CHECK(energy_density_tilted_product(0.0, -1.0, -0.75) == Approx(-0.375).epsilon(1e-14));
  CHECK(energy_density_tilted_product(pi / 8, -1.0, -0.75) == Approx(-0.4375).epsilon(1e-14));
  CHECK(energy_density_tilted_neel(pi / 4, 2.0, -1.0, -0.75) == Approx(-0.109375).epsilon(1e-12));
  for (double a : {1.0, 2.0, 5.0}) CHECK(energy_density_tilted_neel(0.0, a, -1.0, -0.75) == Approx(-0.375));
}

TEST_CASE("normalized energy density") {
  CHECK(normalized_energy_density(-0.503, -0.503, 0.466) == 0.0);
  CHECK(normalized_energy_density(0.466, -0.503, 0.466) == 1.0);
  CHECK(normalized_energy_density(-0.5, -0.503, 0.466) == Approx(0.0031).epsilon(0.01));
  CHECK_THROWS_AS(normalized_energy_density(-0.6, -0.503, 0.466), ConsistencyError);
}

TEST_CASE("model json round trip") {
  ModelSpec s;
  s.jx = -0.5;
  s.jy = -1.5;
  s.hz = 5.0;
  s.alpha = 4.0;
  s.n = 10;
  s.variant = Variant::DPlusField;
  const ModelSpec r = model_from_json(to_json(s));
  CHECK(r.jx == s.jx);
  CHECK(r.jy == s.jy);
  CHECK(r.hz == s.hz);
  CHECK(r.alpha == s.alpha);
  CHECK(r.n == s.n);
  CHECK(r.variant == s.variant);

  const ModelSpec inf = model_from_json({{"alpha", "inf"}, {"n", 4}});
  CHECK(inf.nearest_neighbor);
  CHECK_THROWS_AS(model_from_json({{"alpha", 2.0}}), ConfigError);
  CHECK_THROWS_AS(model_from_json({{"n", 4}, {"variant", "bogus"}}), ConfigError);
  CHECK_THROWS_AS(model_from_json({{"n", 4}, {"alpha", -2.0}}), ConfigError);
}
