#include "doctest.h"

#include "test_support.hpp"

#include "reebcone/optimize.hpp"

#include <cmath>

using namespace testsupport;
using namespace reebcone::optimize;

namespace {

Real rel_err(const Real& a, const Real& b) {
  Real d = abs_of(Real(a - b));
  Real s = abs_of(b) > 1 ? abs_of(b) : Real(1);
  return d / s;
}

Real y21_coordinate() { return (boost::multiprecision::sqrt(Real(13)) - 1) / 3; }

}  // namespace

TEST_CASE("slice chart parameterizes the normalized slice") {
  for (const auto& f : fixtures()) {
    auto cone = cone_of(f);
    auto l = geometry::gorenstein_vector(cone);
    auto chart = make_chart(cone, l);
    CHECK(chart.basis.size() == f.dim - 1);
    CHECK(dot(chart.origin, l.l) == 1);
    Rng rng(51);
    for (int trial = 0; trial < 10; ++trial) {
      Vec<Rational> y;
      for (std::size_t k = 0; k + 1 < f.dim; ++k) y.emplace_back(rng.uniform(-5, 5), rng.uniform(1, 9));
      auto xi = chart_point(chart, y);
      CHECK(dot(xi, l.l) == 1);
      CHECK(chart_coords(chart, xi) == y);
    }
  }
}

TEST_CASE("volume objective of C2 matches the closed form") {
  auto cone = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto chart = make_chart(cone, geometry::gorenstein_vector(cone));
  for (Rational y : {q(0), q(1, 5), q(-1, 3), q(2, 5)}) {
    auto xi = chart_point(chart, Vec<Rational>{y});
    // xi = (s, 1 - s); a0 = 2 vol = 1 / (s (1 - s)).
    Rational s = xi[0];
    CHECK(xi[1] == 1 - s);
    Rational g = s * (1 - s), gp = 1 - 2 * s;
    auto obj = volume_objective(cone, chart, Vec<Rational>{y});
    CHECK(obj.value == 1 / g);
    Rational ds = chart.basis[0][0];  // d s / d y
    CHECK(obj.gradient[0] == -gp / (g * g) * ds);
    CHECK(obj.hessian(0, 0) == (2 / (g * g) + 2 * gp * gp / (g * g * g)) * ds * ds);
  }
}

TEST_CASE("objective derivatives agree with finite differences") {
  Rng rng(52);
  for (const auto& f : fixtures()) {
    auto cone = cone_of(f);
    auto chart = make_chart(cone, geometry::gorenstein_vector(cone));
    const std::size_t d = f.dim - 1;
    Vec<Real> y(d, Real(0));
    for (auto& x : y) x = Real(rng.uniform(-10, 10)) / 100;
    auto obj = volume_objective(cone, chart, y);
    const Real h("1e-12");
    for (std::size_t k = 0; k < d; ++k) {
      Vec<Real> yp(y), ym(y);
      yp[k] += h;
      ym[k] -= h;
      auto op = volume_objective(cone, chart, yp);
      auto om = volume_objective(cone, chart, ym);
      CAPTURE(f.name);
      CHECK(rel_err((op.value - om.value) / (2 * h), obj.gradient[k]) < Real("1e-15"));
      for (std::size_t j = 0; j < d; ++j)
        CHECK(rel_err((op.gradient[j] - om.gradient[j]) / (2 * h), obj.hessian(j, k)) < Real("1e-15"));
    }
  }
}

TEST_CASE("objective refuses points outside the Reeb cone") {
  auto cone = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto chart = make_chart(cone, geometry::gorenstein_vector(cone));
  try {
    volume_objective(cone, chart, Vec<Real>{Real(1)});
    FAIL("expected LeftReebCone");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LeftReebCone);
  }
}

TEST_CASE("minimizer on orthants, A1 and conifold") {
  struct Case {
    std::vector<IntVec> rays;
    std::size_t dim;
    Vec<Rational> expected;
  };
  std::vector<Case> cases{
      {{{1, 0}, {0, 1}}, 2, {q(1, 2), q(1, 2)}},
      {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 3, {q(1, 3), q(1, 3), q(1, 3)}},
      {{{1, 0}, {1, 2}}, 2, {q(1), q(1)}},
      {{{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {1, 0, 1}}, 3, {q(1), q(1, 2), q(1, 2)}},
  };
  for (const auto& c : cases) {
    auto cone = geometry::dual_cone(c.rays, c.dim);
    auto r = minimize_volume(cone);
    for (std::size_t k = 0; k < c.dim; ++k) CHECK(abs_of(Real(r.xi_star.xi()[k] - Real(c.expected[k]))) < Real("1e-12"));
    CHECK(r.kss_residual <= Real("1e-12"));
    CHECK(abs_of(Real(r.delta_star - 1)) <= Real("1e-8"));
    CHECK(r.gradient_norm <= Real("1e-10"));
    CHECK(r.margin > 0);
  }
}

TEST_CASE("irregular Y21 minimizer matches the closed form") {
  auto cone = cone_of(fixtures()[4]);
  auto r = minimize_volume(cone);
  const Real a = y21_coordinate();
  CHECK(abs_of(Real(r.xi_star.xi()[0] - 1)) < Real("1e-25"));
  CHECK(abs_of(Real(r.xi_star.xi()[1] - a)) < Real("1e-25"));
  CHECK(abs_of(Real(r.xi_star.xi()[2] - a)) < Real("1e-25"));
  CHECK(r.kss_residual < Real("1e-25"));
}

TEST_CASE("minimizer satisfies stationarity identities") {
  for (const auto& f : fixtures()) {
    auto cone = cone_of(f);
    auto l = geometry::gorenstein_vector(cone);
    auto r = minimize_volume(cone);
    auto pieces = characters::decompose_dual(cone);
    auto chart = make_chart(cone, l);
    for (const auto& b : chart.basis) {
      auto eta = to_real(b);
      auto w = characters::weight_character(pieces, r.xi_star, eta, 1);
      auto idx = characters::index_character(pieces, r.xi_star, 1);
      auto k = stability::coefficients(idx, w, f.dim);
      CAPTURE(f.name);
      CHECK(abs_of(k.b0) <= Real("1e-8"));
      auto fut = stability::futaki_product(pieces, r.xi_star, eta);
      CHECK(abs_of(fut.fut) <= Real("1e-6"));
      Vec<Real> shifted(eta);
      for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 2 * r.xi_star.xi()[i];
      auto fut2 = stability::futaki_product(pieces, r.xi_star, shifted);
      CHECK(abs_of(Real(fut2.fut - fut.fut)) <= Real("1e-30"));
    }
  }
}

TEST_CASE("minimize is deterministic") {
  auto cone = cone_of(fixtures()[4]);
  auto a = minimize_volume(cone);
  auto b = minimize_volume(cone);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.xi_star.xi()[k] == b.xi_star.xi()[k]);
  CHECK(a.iterations == b.iterations);
  CHECK(a.a0_star == b.a0_star);
}

TEST_CASE("iteration limit is reported") {
  auto cone = cone_of(fixtures()[4]);
  MinimizeOptions opts;
  opts.max_iter = 1;
  try {
    minimize_volume(cone, opts);
    FAIL("expected MaxIterations");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MaxIterations);
  }
}

TEST_CASE("minimize requires a Gorenstein vector") {
  auto cone = geometry::dual_cone({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, -2}}, 3);
  try {
    minimize_volume(cone);
    FAIL("expected NotQGorenstein");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotQGorenstein);
  }
}

TEST_CASE("grid oracle") {
  auto c2 = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto g = grid_search_oracle(c2, 100);
  CHECK(g.samples <= 100);
  CHECK(abs_of(Real(g.xi[0] - Real("0.5"))) <= Real("0.01"));

  for (const auto& f : fixtures()) {
    auto cone = cone_of(f);
    auto r = minimize_volume(cone);
    auto grid = grid_search_oracle(cone, 2000, 2);
    CAPTURE(f.name);
    CHECK(grid.samples <= 2000);
    CHECK(grid.value >= r.a0_star - Real("1e-12"));
    auto y = chart_coords(make_chart(cone, geometry::gorenstein_vector(cone)), r.xi_star.xi());
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(abs_of(Real(grid.y[k] - y[k])) <= grid.spacing[k]);
    auto again = grid_search_oracle(cone, 2000, 1);
    CHECK(again.value == grid.value);
  }
  CHECK_THROWS_AS(grid_search_oracle(c2, 10001), Error);
}

TEST_CASE("volume is midpoint convex on the slice") {
  Rng rng(53);
  int failures = 0;
  for (const auto& f : fixtures()) {
    auto cone = cone_of(f);
    auto chart = make_chart(cone, geometry::gorenstein_vector(cone));
    int pairs = 0;
    while (pairs < 100) {
      Vec<Real> y1, y2;
      for (std::size_t k = 0; k + 1 < f.dim; ++k) {
        y1.push_back(Real(rng.uniform(-40, 40)) / 100);
        y2.push_back(Real(rng.uniform(-40, 40)) / 100);
      }
      Vec<Real> mid;
      for (std::size_t k = 0; k < y1.size(); ++k) mid.push_back((y1[k] + y2[k]) / 2);
      try {
        Real v1 = volume_objective(cone, chart, y1).value;
        Real v2 = volume_objective(cone, chart, y2).value;
        Real vm = volume_objective(cone, chart, mid).value;
        ++pairs;
        if (vm > (v1 + v2) / 2 + Real("1e-12")) ++failures;
      } catch (const Error&) {
        // Outside the Reeb cone; draw again.
      }
    }
  }
  WARN(failures == 0);
}

TEST_CASE("rationality probe") {
  auto a = rationality_probe(Vec<Real>{Real("0.5"), Real("0.5")}, 10);
  REQUIRE(a);
  CHECK(a->xi == Vec<Rational>{q(1, 2), q(1, 2)});
  CHECK(a->distance == 0);

  auto b = rationality_probe(Vec<Real>{Real("0.333333333"), Real("0.666666667")}, 10);
  REQUIRE(b);
  CHECK(b->xi == Vec<Rational>{q(1, 3), q(2, 3)});
  CHECK(b->distance <= Real("1e-9"));

  // Irregular: the distance stays positive at every bound up to 10^4.
  auto cone = cone_of(fixtures()[4]);
  auto r = minimize_volume(cone);
  Real prev = 1;
  for (std::int64_t bound : {10, 100, 1000, 10000}) {
    auto c = rationality_probe(r.xi_star.xi(), bound);
    REQUIRE(c);
    CHECK(c->distance > Real("1e-12"));
    CHECK(c->distance <= prev);
    prev = c->distance;
  }
}
