#include "doctest.h"

#include "test_support.hpp"

#include <cmath>
#include <set>

using namespace testsupport;
using characters::decompose_dual;
using characters::index_character;
using characters::weight_character;

namespace {

// Truncated power series in x over the rationals, independent of the library.
using Series = std::vector<Rational>;

Series mul(const Series& a, const Series& b, std::size_t len) {
  Series c(len, Rational(0));
  for (std::size_t i = 0; i < a.size() && i < len; ++i)
    for (std::size_t j = 0; j < b.size() && i + j < len; ++j) c[i + j] += a[i] * b[j];
  return c;
}

Series inv(const Series& a, std::size_t len) {
  Series b(len, Rational(0));
  b[0] = 1 / a[0];
  for (std::size_t k = 1; k < len; ++k) {
    Rational s = 0;
    for (std::size_t j = 1; j <= k && j < a.size(); ++j) s += a[j] * b[k - j];
    b[k] = -s / a[0];
  }
  return b;
}

// e^{-c x}
Series exp_neg(const Rational& c, std::size_t len) {
  Series s(len);
  Rational term = 1;
  for (std::size_t k = 0; k < len; ++k) {
    s[k] = term;
    term *= -c / Rational(static_cast<long>(k + 1));
  }
  return s;
}

// x / (1 - e^{-c x}) = (1/c) * 1 / (sum_k (-1)^k (c x)^k / (k+1)!)
Series geometric_kernel(const Rational& c, std::size_t len) {
  Series d(len);
  Rational term = 1;
  for (std::size_t k = 0; k < len; ++k) {
    d[k] = term * c;  // (1 - e^{-cx}) / x
    term *= -c / Rational(static_cast<long>(k + 2));
  }
  return inv(d, len);
}

// Orthant closed forms: F = prod_k 1/(1 - e^{-t xi_k}); weight character
// C_eta = sum_k eta_k e^{-t xi_k}/(1-e^{-t xi_k}) * F. Returned as the
// coefficients of t^{-n} F (resp. t^{-n-1} C).
Series orthant_index(const Vec<Rational>& xi, std::size_t len) {
  Series f{Rational(1)};
  for (const auto& x : xi) f = mul(f, geometric_kernel(x, len), len);
  f.resize(len);
  return f;
}

Series orthant_weight(const Vec<Rational>& xi, const Vec<Rational>& eta, std::size_t len) {
  Series f = orthant_index(xi, len);
  Series total(len, Rational(0));
  for (std::size_t k = 0; k < xi.size(); ++k) {
    // e^{-c t}/(1-e^{-c t}) = t^{-1} * e^{-c t} * g(t)
    Series w = mul(exp_neg(xi[k], len), geometric_kernel(xi[k], len), len);
    Series term = mul(f, w, len);
    for (std::size_t j = 0; j < len; ++j) total[j] += eta[k] * term[j];
  }
  return total;
}

std::multiset<IntVec> as_multiset(const std::vector<IntVec>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("Bernoulli numbers") {
  const auto& b = characters::bernoulli_numbers(9);
  Vec<Rational> expected{1, q(-1, 2), q(1, 6), 0, q(-1, 30), 0, q(1, 42), 0, q(-1, 30)};
  for (std::size_t k = 0; k < expected.size(); ++k) CHECK(b[k] == expected[k]);
}

TEST_CASE("decomposition examples") {
  auto c2 = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto p2 = decompose_dual(c2);
  REQUIRE(p2.size() == 1);
  CHECK(p2[0].box_points == std::vector<IntVec>{{0, 0}});

  auto a1 = geometry::dual_cone({{1, 0}, {1, 2}}, 2);
  std::size_t boxes = 0;
  for (const auto& p : decompose_dual(a1)) boxes += p.box_points.size();
  CHECK(boxes == 2);

  auto con = geometry::dual_cone({{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {1, 0, 1}}, 3);
  CHECK(decompose_dual(con).size() == 2);

  CHECK_THROWS_AS(decompose_dual(a1, {1}), Error);
}

TEST_CASE("pieces: box count equals |det| and box points lie in the dual") {
  Rng rng(31);
  auto check = [](const geometry::ToricCone& cone) {
    for (const auto& p : decompose_dual(cone)) {
      CHECK(p.sign == 1);
      Integer d = linalg::integer_determinant(p.generators);
      CHECK(Integer(static_cast<long>(p.box_points.size())) == (d < 0 ? Integer(-d) : d));
      for (const auto& b : p.box_points)
        for (const auto& v : cone.rays()) CHECK(dot(v, b) >= 0);
    }
  };
  for (const auto& f : fixtures()) check(cone_of(f));
  for (int trial = 0; trial < 30; ++trial) {
    auto c = random_cone(rng, 2 + trial % 2);
    check(geometry::dual_cone(c.rays, c.dim));
  }
}

TEST_CASE("half-open pieces partition the dual lattice points") {
  Rng rng(32);
  auto check = [](const std::vector<IntVec>& rays, std::size_t dim, const Vec<Rational>& xi, std::int64_t m) {
    auto cone = geometry::dual_cone(rays, dim);
    std::vector<IntVec> covered;
    for (const auto& p : decompose_dual(cone)) {
      auto pts = characters::piece_points(p, xi, Rational(m));
      covered.insert(covered.end(), pts.begin(), pts.end());
    }
    auto brute = brute_points(cone.rays(), xi, Rational(m), box_bound(cone, xi, m));
    CHECK(as_multiset(covered) == as_multiset(brute));
  };
  for (const auto& f : fixtures())
    for (std::int64_t m : {1, 4, 10}) check(f.rays, f.dim, f.xi, m);
  for (int trial = 0; trial < 30; ++trial) {
    auto c = random_cone(rng, 2 + trial % 2);
    check(c.rays, c.dim, c.xi, 1 + trial % 4);
  }
}

TEST_CASE("index character of C^1 and C^2") {
  auto c1 = geometry::dual_cone({{1}}, 1);
  auto f1 = index_character(decompose_dual(c1), ReebVector<Rational>(c1, {1}), 4);
  CHECK(f1.order_low == -1);
  CHECK(f1.coeffs == Vec<Rational>{1, q(1, 2), q(1, 12), 0, q(-1, 720)});

  auto c2 = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto f2 = index_character(decompose_dual(c2), ReebVector<Rational>(c2, {1, 1}), 2);
  CHECK(f2.order_low == -2);
  CHECK(f2.coeffs == Vec<Rational>{1, 1, q(5, 12)});
  auto a = stability::index_coefficients(f2, 2);
  CHECK(a.a0 == 1);
  CHECK(*a.a1 == 1);
}

TEST_CASE("conifold index character matches its Hilbert series to high order") {
  // At xi = (4,2,2) every generator of the dual semigroup has weight 2, so
  // F = (1+s)/(1-s)^3 with s = exp(-2t); coefficients expanded independently.
  auto cone = geometry::dual_cone({{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {1, 0, 1}}, 3);
  characters::ExpansionOptions deep;
  deep.max_order = 8;
  auto f = index_character(decompose_dual(cone), ReebVector<Rational>(cone, {4, 2, 2}), 8, deep);
  CHECK(f.order_low == -3);
  CHECK(f.coeffs == Vec<Rational>{q(1, 4), q(1, 2), q(1, 2), q(1, 3), q(3, 20), q(1, 30), q(-11, 1890), q(-1, 189),
                                  q(-1, 18900)});
}

TEST_CASE("weight character of C^2") {
  auto c2 = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto pieces = decompose_dual(c2);
  ReebVector<Rational> xi(c2, {1, 1});
  auto w = weight_character(pieces, xi, Vec<Rational>{1, 0}, 3);
  CHECK(w.order_low == -3);
  CHECK(w.coeffs == Vec<Rational>{1, q(1, 2), 0, q(-1, 24)});
  auto k = stability::coefficients(index_character(pieces, xi, 3), w, 2);
  CHECK(k.b0 == q(1, 2));
  CHECK(k.b1 == q(1, 2));
  auto zero = weight_character(pieces, xi, Vec<Rational>{0, 0}, 3);
  for (const auto& c : zero.coeffs) CHECK(c == 0);
}

TEST_CASE("orthant characters match closed-form products") {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = static_cast<std::size_t>(1 + trial % 3);
    std::vector<IntVec> rays(n, IntVec(n, 0));
    for (std::size_t k = 0; k < n; ++k) rays[k][k] = 1;
    auto cone = geometry::dual_cone(rays, n);
    Vec<Rational> xi, eta;
    for (std::size_t k = 0; k < n; ++k) {
      xi.push_back(rng.positive_rational());
      eta.emplace_back(rng.uniform(-3, 3));
    }
    auto pieces = decompose_dual(cone);
    ReebVector<Rational> reeb(cone, xi);
    auto f = index_character(pieces, reeb, 4);
    auto w = weight_character(pieces, reeb, eta, 4);
    CHECK(f.coeffs == orthant_index(xi, 5));
    CHECK(w.coeffs == orthant_weight(xi, eta, 5));
  }
}

TEST_CASE("order limits") {
  auto c2 = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  auto pieces = decompose_dual(c2);
  ReebVector<Rational> xi(c2, {1, 1});
  CHECK_THROWS_AS(index_character(pieces, xi, 5), Error);
  try {
    index_character(pieces, xi, 5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OrderTooLarge);
  }
  characters::ExpansionOptions deep;
  deep.max_order = 6;
  CHECK(index_character(pieces, xi, 6, deep).coeffs.size() == 7);
  CHECK_THROWS_AS(index_character(pieces, xi, -1), Error);
}

TEST_CASE("a0 equals n vol(Q)") {
  Rng rng(34);
  auto check = [](const geometry::ToricCone& cone, const Vec<Rational>& xi) {
    ReebVector<Rational> reeb(cone, xi);
    auto f = index_character(decompose_dual(cone), reeb, 0);
    auto a = stability::index_coefficients(f, cone.dim());
    CHECK(a.a0 == Rational(static_cast<long>(cone.dim())) * geometry::polytope_q(cone, reeb).volume_Q);
  };
  for (const auto& f : fixtures()) check(cone_of(f), f.xi);
  for (int trial = 0; trial < 40; ++trial) {
    auto c = random_cone(rng, 2 + trial % 2);
    check(geometry::dual_cone(c.rays, c.dim), c.xi);
  }
  // Irrational xi: relative 1e-9.
  auto y = cone_of(fixtures()[4]);
  Vec<Real> xr{Real(1), boost::multiprecision::sqrt(Real(13)) / 4, boost::multiprecision::sqrt(Real(13)) / 4};
  ReebVector<Real> reeb(y, xr);
  auto f = index_character(decompose_dual(y), reeb, 0);
  Real a0 = stability::index_coefficients(f, 3).a0;
  Real vol = geometry::polytope_q(y, reeb).volume_Q;
  CHECK(abs_of(Real(a0 - 3 * vol)) / a0 < Real("1e-9"));
}

TEST_CASE("homogeneity: F(c xi, t) = F(xi, c t)") {
  Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_cone(rng, 2 + trial % 2);
    auto cone = geometry::dual_cone(c.rays, c.dim);
    auto pieces = decompose_dual(cone);
    Rational s = rng.positive_rational();
    Vec<Rational> scaled(c.xi);
    for (auto& x : scaled) x *= s;
    auto f1 = index_character(pieces, ReebVector<Rational>(cone, c.xi), 3);
    auto f2 = index_character(pieces, ReebVector<Rational>(cone, scaled), 3);
    for (int e = f1.order_low; e <= f1.order_high(); ++e) {
      Rational pw = 1;
      for (int k = 0; k < (e < 0 ? -e : e); ++k) pw *= s;
      CHECK(f2.coefficient(e) == (e < 0 ? f1.coefficient(e) / pw : f1.coefficient(e) * pw));
    }
  }
}

TEST_CASE("weight character is linear in eta") {
  Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_cone(rng, 2 + trial % 2);
    auto cone = geometry::dual_cone(c.rays, c.dim);
    auto pieces = decompose_dual(cone);
    ReebVector<Rational> xi(cone, c.xi);
    Vec<Rational> e1, e2, sum;
    for (std::size_t k = 0; k < c.dim; ++k) {
      e1.emplace_back(rng.uniform(-3, 3));
      e2.emplace_back(rng.uniform(-3, 3), rng.uniform(1, 3));
      sum.push_back(e1.back() + e2.back());
    }
    auto w1 = weight_character(pieces, xi, e1, 3);
    auto w2 = weight_character(pieces, xi, e2, 3);
    auto ws = weight_character(pieces, xi, sum, 3);
    for (std::size_t j = 0; j < ws.coeffs.size(); ++j) CHECK(ws.coeffs[j] == w1.coeffs[j] + w2.coeffs[j]);
  }
}

TEST_CASE("b0 is the derivative of a0 along -eta") {
  Rng rng(37);
  for (const auto& fx : fixtures()) {
    auto cone = cone_of(fx);
    auto pieces = decompose_dual(cone);
    const std::size_t n = fx.dim;
    for (int trial = 0; trial < 5; ++trial) {
      Vec<Rational> xi = random_interior(rng, cone.rays(), n);
      Vec<Rational> eta;
      for (std::size_t k = 0; k < n; ++k) eta.emplace_back(rng.uniform(-2, 2));
      ReebVector<Rational> reeb(cone, xi);
      auto k = stability::coefficients(index_character(pieces, reeb, 1), weight_character(pieces, reeb, eta, 1), n);
      // Central difference in working precision.
      const Real h("1e-5");
      auto a0_at = [&](const Real& s) {
        Vec<Real> x;
        for (std::size_t j = 0; j < n; ++j) x.push_back(Real(xi[j]) - s * Real(eta[j]));
        return Real(n) * geometry::volume_q(cone, x);
      };
      Real deriv = (a0_at(h) - a0_at(-h)) / (2 * h);
      Real b0 = Real(k.b0);
      CAPTURE(fx.name);
      Real scale = abs_of(b0) > Real("1e-9") * abs_of(Real(k.a0)) ? abs_of(b0) : Real("1e-9") * abs_of(Real(k.a0));
      CHECK(abs_of(Real(b0 - deriv / Real(n))) <= Real("1e-6") * scale);
    }
  }
}

TEST_CASE("real and rational expansions agree") {
  for (const auto& fx : fixtures()) {
    auto cone = cone_of(fx);
    auto pieces = decompose_dual(cone);
    Vec<Rational> eta(fx.dim, Rational(0));
    eta[0] = 1;
    auto fr = index_character(pieces, ReebVector<Rational>(cone, fx.xi), 4);
    auto fR = index_character(pieces, ReebVector<Real>(cone, to_real(fx.xi)), 4);
    auto wr = weight_character(pieces, ReebVector<Rational>(cone, fx.xi), eta, 4);
    auto wR = weight_character(pieces, ReebVector<Real>(cone, to_real(fx.xi)), to_real(eta), 4);
    for (std::size_t j = 0; j < fr.coeffs.size(); ++j) {
      CHECK(abs_of(Real(fR.coeffs[j] - Real(fr.coeffs[j]))) < Real("1e-30"));
      CHECK(abs_of(Real(wR.coeffs[j] - Real(wr.coeffs[j]))) < Real("1e-30"));
    }
  }
}

TEST_CASE("expansion is independent of the thread count") {
  auto cone = cone_of(fixtures()[4]);
  auto pieces = decompose_dual(cone);
  ReebVector<Real> xi(cone, {Real(1), Real("0.8685"), Real("0.8685")});
  characters::ExpansionOptions one, many;
  many.threads = 4;
  auto a = index_character(pieces, xi, 4, one);
  auto b = index_character(pieces, xi, 4, many);
  for (std::size_t j = 0; j < a.coeffs.size(); ++j) CHECK(a.coeffs[j] == b.coeffs[j]);
}

TEST_CASE("truncated oracle closed forms") {
  auto c1 = geometry::dual_cone({{1}}, 1);
  ReebVector<Rational> x1(c1, {1});
  std::optional<Vec<Rational>> none;
  double cut = characters::choose_cutoff(c1, x1, none, 1.0);
  auto r1 = characters::truncated_character_oracle(c1, x1, none, 1.0, cut);
  CHECK(std::abs(static_cast<double>(r1.value) - 1.0 / (1.0 - std::exp(-1.0))) < 1e-12);
  CHECK(std::abs(static_cast<double>(r1.value) - 1.5819767) < 1e-7);

  auto c2 = geometry::dual_cone({{1, 0}, {0, 1}}, 2);
  ReebVector<Rational> x2(c2, {1, 1});
  cut = characters::choose_cutoff(c2, x2, none, 0.5);
  auto r2 = characters::truncated_character_oracle(c2, x2, none, 0.5, cut);
  CHECK(std::abs(static_cast<double>(r2.value) - std::pow(1.0 - std::exp(-0.5), -2.0)) < 1e-10);

  // Weight: sum u_1 e^{-t(u_1+u_2)} = e^{-t}/(1-e^{-t})^3.
  std::optional<Vec<Rational>> eta(Vec<Rational>{1, 0});
  cut = characters::choose_cutoff(c2, x2, eta, 0.5);
  auto r3 = characters::truncated_character_oracle(c2, x2, eta, 0.5, cut);
  CHECK(std::abs(static_cast<double>(r3.value) - std::exp(-0.5) * std::pow(1.0 - std::exp(-0.5), -3.0)) < 1e-9);

  try {
    characters::truncated_character_oracle(c2, x2, none, 0.5, 1.0);
    FAIL("expected CutoffTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CutoffTooSmall);
  }
}

TEST_CASE("truncated oracle approaches the series as t shrinks") {
  for (const auto& fx : fixtures()) {
    auto cone = cone_of(fx);
    ReebVector<Rational> xi(cone, fx.xi);
    auto f = index_character(decompose_dual(cone), xi, 4);
    std::optional<Vec<Rational>> none;
    double prev = 1;
    for (double t : {0.4, 0.2, 0.1, 0.05}) {
      double cut = characters::choose_cutoff(cone, xi, none, t);
      auto r = characters::truncated_character_oracle(cone, xi, none, t, cut);
      double rel = std::abs(static_cast<double>(r.value - f.evaluate(t)) / static_cast<double>(r.value));
      CAPTURE(fx.name);
      CAPTURE(t);
      CHECK(rel < prev);
      prev = rel;
    }
    CHECK(prev < 0.01);
  }
}
