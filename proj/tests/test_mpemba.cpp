#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "qme/error.hpp"
#include "qme/mpemba.hpp"

using namespace qme;
using doctest::Approx;

namespace {
std::vector<double> grid(double dt, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = k * dt;
  return t;
}
}  // namespace

TEST_CASE("linear ratio crosses at t = 1") {
  const auto t = grid(0.1, 31);
  std::vector<double> s1, s2;
  for (double x : t) {
    s2.push_back(0.5);
    s1.push_back(0.5 * (2.0 - x));
  }
  const MpembaReport r = detect_mpemba(t, s1, s2);
  CHECK(r.verdict == Verdict::Crossed);
  REQUIRE(r.tau_m);
  CHECK(*r.tau_m == Approx(1.0).epsilon(1e-12));
  CHECK(r.r0 == Approx(2.0));
  CHECK(r.curve.t.size() == t.size());
}

TEST_CASE("constant ratio never crosses") {
  const auto t = grid(0.5, 41);
  std::vector<double> s1(t.size()), s2(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    s2[k] = std::exp(-t[k] / 5);
    s1[k] = 1.5 * s2[k];
  }
  const MpembaReport r = detect_mpemba(t, s1, s2);
  CHECK(r.verdict == Verdict::NotCrossed);
  CHECK_FALSE(r.tau_m);
  CHECK(r.horizon == 20.0);
}

TEST_CASE("swapping the inputs preserves tau_M") {
  const auto t = grid(0.05, 200);
  std::vector<double> a, b;
  for (double x : t) {
    a.push_back(std::exp(-x));
    b.push_back(0.8 * std::exp(-0.5 * x));
  }
  const MpembaReport r1 = detect_mpemba(t, a, b);
  const MpembaReport r2 = detect_mpemba(t, b, a);
  CHECK_FALSE(r1.swapped);
  CHECK(r2.swapped);
  REQUIRE(r1.tau_m);
  REQUIRE(r2.tau_m);
  CHECK(*r1.tau_m == *r2.tau_m);
  CHECK(*r1.tau_m == Approx(std::log(1.25) / 0.5).epsilon(1e-3));

  // Common positive rescaling leaves tau_M unchanged.
  std::vector<double> a2, b2;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double g = 0.3 + t[k] * t[k];
    a2.push_back(a[k] * g);
    b2.push_back(b[k] * g);
  }
  CHECK(*detect_mpemba(t, a2, b2).tau_m == Approx(*r1.tau_m).epsilon(1e-12));
}

TEST_CASE("short dips below one are not crossings") {
  const auto t = grid(0.1, 50);
  std::vector<double> s1(t.size()), s2(t.size(), 1.0);
  for (std::size_t k = 0; k < t.size(); ++k) s1[k] = 1.2;
  s1[10] = 0.9;
  s1[11] = 0.95;
  s1[30] = 0.9;
  const MpembaReport r = detect_mpemba(t, s1, s2);
  CHECK(r.verdict == Verdict::NotCrossed);
  s1[32] = s1[31] = 0.9;
  const MpembaReport c = detect_mpemba(t, s1, s2);
  CHECK(c.verdict == Verdict::Crossed);
  CHECK(*c.tau_m == Approx(2.9 + 0.2 / 0.3 * 0.1));
  REQUIRE(c.decided_at);
  CHECK(*c.decided_at == Approx(3.2));
}

TEST_CASE("second state restored below the floor") {
  const auto t = grid(0.1, 20);
  std::vector<double> s1(t.size(), 0.5), s2(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) s2[k] = k < 8 ? 0.3 : 1e-8;
  const MpembaReport r = detect_mpemba(t, s1, s2);
  CHECK(r.verdict == Verdict::SymmetryRestoredSecond);
  CHECK(r.last_valid_time == Approx(0.7));
  CHECK(r.last_valid_ratio == Approx(0.5 / 0.3));
  CHECK(std::isnan(r.curve.r[10]));
  CHECK(r.curve.floored[10]);
}

TEST_CASE("restored first state counts as below one") {
  const auto t = grid(0.1, 20);
  std::vector<double> s1(t.size()), s2(t.size(), 1e-3);
  for (std::size_t k = 0; k < t.size(); ++k) s1[k] = k < 5 ? 0.01 : 1e-9;
  const MpembaReport r = detect_mpemba(t, s1, s2);
  CHECK(r.verdict == Verdict::Crossed);
}

TEST_CASE("precondition errors") {
  CHECK_THROWS_AS(detect_mpemba({0.0, 1.0}, {0.5, 0.4}, {0.5, 0.3}), DomainError);
  CHECK_THROWS_AS(detect_mpemba({0.0, 1.0}, {0.5, 0.4}, {1e-9, 0.3}), DomainError);
  CHECK_THROWS_AS(detect_mpemba({0.0, 1.0}, {0.5}, {0.4, 0.3}), DomainError);
  CHECK_THROWS_AS(detect_mpemba({0.0, 0.0}, {0.5, 0.4}, {0.4, 0.3}), DomainError);
}

TEST_CASE("horizon limits the analysis") {
  const auto t = grid(0.1, 31);
  std::vector<double> s1, s2(t.size(), 1.0);
  for (double x : t) s1.push_back(2.0 - x);
  MpembaOptions o;
  o.horizon = 0.95;
  const MpembaReport r = detect_mpemba(t, s1, s2, o);
  CHECK(r.verdict == Verdict::NotCrossed);
  CHECK(r.horizon == Approx(0.9));
}

TEST_CASE("streaming monitor decides early") {
  CrossingMonitor m;
  m.push(0.0, 2.0, 1.0);
  CHECK_FALSE(m.decided());
  for (int k = 1; k <= 6; ++k) m.push(k * 0.5, 2.0 - k * 0.3, 1.0);
  CHECK(m.decided());
  CHECK(m.report().verdict == Verdict::Crossed);
}

TEST_CASE("alpha scan summary") {
  auto make = [](double alpha, Verdict v, double tau) {
    AlphaEntry e;
    e.alpha = alpha;
    e.report.verdict = v;
    if (v == Verdict::Crossed) e.report.tau_m = tau;
    e.report.horizon = 20.0;
    return e;
  };
  const AlphaScanSummary s = mpemba_time_vs_alpha(
      {make(4.0, Verdict::Crossed, 2.0), make(1.5, Verdict::NotCrossed, 0), make(2.5, Verdict::Crossed, 5.0),
       make(2.0, Verdict::NotCrossed, 0)});
  CHECK(s.entries.front().alpha == 1.5);
  REQUIRE(s.alpha_m);
  CHECK(*s.alpha_not_crossed == 2.0);
  CHECK(*s.alpha_crossed == 2.5);
  CHECK(*s.alpha_m == 2.25);
  CHECK(s.horizon == 20.0);
  CHECK_FALSE(s.caveat.empty());
}

TEST_CASE("phase scan keeps order and records failures") {
  std::vector<GridPoint> g;
  for (int k = 0; k < 7; ++k) g.push_back({-0.75, 1.0 + k, 0.0, 10});
  const auto res = phase_scan(
      g,
      [](const GridPoint& p) {
        if (p.alpha == 3.0) throw std::runtime_error("boom");
        ScanPointResult r;
        r.point = p;
        r.c_eff = p.alpha;
        return r;
      },
      3);
  REQUIRE(res.size() == 7);
  for (int k = 0; k < 7; ++k) CHECK(res[k].point.alpha == 1.0 + k);
  CHECK(res[2].error == "boom");
  CHECK(res[3].error.empty());
  CHECK(*res[4].c_eff == 5.0);
}

TEST_CASE("contour groups rows") {
  std::vector<ScanPointResult> pts;
  for (double jz : {-0.5, -0.75})
    for (double a : {1.0, 2.0, 3.0}) {
      ScanPointResult r;
      r.point = {jz, a, 0.0, 10};
      r.report = MpembaReport{};
      r.report->verdict = a > (jz == -0.5 ? 1.5 : 2.5) ? Verdict::Crossed : Verdict::NotCrossed;
      pts.push_back(r);
    }
  const auto c = alpha_m_contour(pts, false);
  REQUIRE(c.size() == 2);
  CHECK(c[0].coordinate == -0.75);
  CHECK(*c[0].summary.alpha_m == 2.5);
  CHECK(*c[1].summary.alpha_m == 1.5);
}

TEST_CASE("prethermal diagnostic") {
  const auto t = grid(0.1, 10);
  std::vector<double> flat(10, -3.0);
  const auto p = prethermal_diagnostic(t, flat);
  CHECK_FALSE(p.departed);
  for (double r : p.ratio) CHECK(r == 1.0);
  std::vector<double> drop = flat;
  drop[6] = -2.0;
  const auto q = prethermal_diagnostic(t, drop);
  CHECK(q.departed);
  CHECK(*q.departure_time == Approx(0.6));
  CHECK_THROWS_AS(prethermal_diagnostic(t, std::vector<double>(10, 0.0)), DomainError);
}
