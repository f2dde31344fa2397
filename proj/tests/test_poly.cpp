#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include "pvstab/errors.hpp"
#include "pvstab/poly.hpp"

using namespace pvstab;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = 3.141592653589793;

// Nearest-distance check between a computed root set and the expected one.
double match_roots(const std::vector<cplx>& got, const std::vector<cplx>& want,
                   double rel_tol) {
  REQUIRE(got.size() == want.size());
  double worst = 0.0;
  std::vector<bool> used(got.size(), false);
  for (const cplx& w : want) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(got[i] - w);
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    used[best_i] = true;
    const double scale = std::max(1.0, std::abs(w));
    CHECK(best <= rel_tol * scale);
    worst = std::max(worst, best / scale);
  }
  return worst;
}

RationalFunction linear_over_one(double root) {
  // (s - root) / 1
  return RationalFunction::from(Polynomial({-root, 1.0}),
                                Polynomial::constant(1.0));
}

}  // namespace

TEST_CASE("polynomial canonical form trims exact zeros only") {
  Polynomial p({1.0, 2.0, 0.0, 0.0});
  CHECK(p.degree() == 1);
  CHECK(p.coeffs() == std::vector<double>{1.0, 2.0});

  Polynomial tiny({1.0, 1e-300});  // small but nonzero must survive
  CHECK(tiny.degree() == 1);

  CHECK(Polynomial::zero().degree() == -1);
  CHECK(Polynomial::zero().is_zero());
  CHECK(Polynomial({0.0, 0.0}).is_zero());
  CHECK(Polynomial::zero().leading() == 0.0);
  CHECK(Polynomial::constant(3.5).degree() == 0);
  CHECK(Polynomial::term(2.0, 3).coeffs() ==
        std::vector<double>{0.0, 0.0, 0.0, 2.0});
  CHECK(Polynomial({5.0, 6.0})[0] == 5.0);
  CHECK(Polynomial({5.0, 6.0})[7] == 0.0);  // out of range reads as 0
}

TEST_CASE("polynomial arithmetic identities") {
  Polynomial a({1.0, -2.0, 3.0});
  Polynomial b({0.5, 4.0});

  CHECK((a + b) == (b + a));
  CHECK((a * b) == (b * a));
  CHECK((a - a).is_zero());
  CHECK((a + (-a)).is_zero());
  CHECK((a * Polynomial::constant(1.0)) == a);
  CHECK((a * Polynomial::zero()).is_zero());
  CHECK((2.0 * a) == (a + a));

  // (1 + 2s)(3 + s^2) = 3 + 6s + s^2 + 2s^3
  CHECK((Polynomial({1.0, 2.0}) * Polynomial({3.0, 0.0, 1.0})).coeffs() ==
        std::vector<double>{3.0, 6.0, 1.0, 2.0});

  CHECK(a.derivative().coeffs() == std::vector<double>{-2.0, 6.0});
  CHECK(Polynomial::constant(4.0).derivative().is_zero());
  CHECK(a.max_abs_coeff() == 3.0);
  CHECK(Polynomial::zero().max_abs_coeff() == 0.0);
}

TEST_CASE("Horner evaluation agrees with direct expansion") {
  Polynomial p({2.0, -1.0, 0.5, 1.0});
  const cplx s(0.3, -1.2);
  const cplx direct = 2.0 - s + 0.5 * s * s + s * s * s;
  CHECK(std::abs(p.eval(s) - direct) <= 1e-14 * std::abs(direct));
  CHECK(p.eval(2.0) == doctest::Approx(2.0 - 2.0 + 2.0 + 8.0));
}

TEST_CASE("poly_roots on a factored quadratic") {
  // s^2 + 3s + 2 = (s+1)(s+2)
  PoleSet ps = poly_roots(Polynomial({2.0, 3.0, 1.0}));
  match_roots(ps.values, {cplx(-1.0, 0.0), cplx(-2.0, 0.0)}, 1e-12);
  CHECK(ps.residual_bound <= 1e-12);
}

TEST_CASE("poly_roots on an undamped resonator") {
  const double w0 = 100.0 * kPi;
  PoleSet ps = poly_roots(Polynomial({w0 * w0, 0.0, 1.0}));
  match_roots(ps.values, {cplx(0.0, w0), cplx(0.0, -w0)}, 1e-12);
}

TEST_CASE("poly_roots recovers planted degree-12 roots") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> re(-5.0, -0.1);
  std::uniform_real_distribution<double> im(0.5, 6.0);

  std::vector<cplx> planted;
  for (int k = 0; k < 5; ++k) {
    const cplx r(re(rng), im(rng));
    planted.push_back(r);
    planted.push_back(std::conj(r));
  }
  planted.push_back(cplx(re(rng), 0.0));
  planted.push_back(cplx(re(rng), 0.0));

  Polynomial p = poly_from_roots(2.5, planted);
  PoleSet ps = poly_roots(p);
  match_roots(ps.values, planted, 1e-8);
}

TEST_CASE("poly_roots round-trips random polynomials up to degree 25") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int deg : {3, 8, 14, 20, 25}) {
    std::vector<double> c(deg + 1);
    for (auto& x : c) x = coeff(rng);
    if (std::abs(c.back()) < 0.1) c.back() = 1.0;
    Polynomial p(std::move(c));

    PoleSet ps = poly_roots(p);
    REQUIRE(static_cast<int>(ps.values.size()) == deg);

    // Multiply the roots back out and compare against the monic input.
    Polynomial rebuilt = poly_from_roots(p.leading(), ps.values);
    for (int k = 0; k <= deg; ++k)
      CHECK(rebuilt[k] ==
            doctest::Approx(p[k]).epsilon(1e-6).scale(p.max_abs_coeff()));
  }
}

TEST_CASE("poly_roots scales through extreme coefficient spans") {
  // (s + 1e5)(s + 1e-3): constant term 1e2, span ~1e8 across coefficients.
  Polynomial p = Polynomial({1e-3, 1.0}) * Polynomial({1e5, 1.0});
  PoleSet ps = poly_roots(p);
  match_roots(ps.values, {cplx(-1e5, 0.0), cplx(-1e-3, 0.0)}, 1e-9);
}

TEST_CASE("poly_roots rejects degenerate inputs") {
  CHECK_THROWS_AS(poly_roots(Polynomial::zero()), DomainError);
  CHECK_THROWS_AS(poly_roots(Polynomial::constant(4.0)), DomainError);
  CHECK_THROWS_AS(
      poly_roots(Polynomial({1.0, std::numeric_limits<double>::quiet_NaN()})),
      InputError);
  CHECK_THROWS_AS(
      poly_roots(Polynomial({std::numeric_limits<double>::infinity(), 1.0})),
      InputError);
}

TEST_CASE("poly_from_roots requires conjugate closure") {
  CHECK_THROWS_AS(poly_from_roots(1.0, {cplx(0.0, 1.0)}), EngineError);
  // A closed pair is fine and real.
  Polynomial p = poly_from_roots(1.0, {cplx(-1.0, 2.0), cplx(-1.0, -2.0)});
  CHECK(p.degree() == 2);
  CHECK(p[0] == doctest::Approx(5.0));
  CHECK(p[1] == doctest::Approx(2.0));
}

TEST_CASE("rational canonical form fixes the denominator sign") {
  RationalFunction r = RationalFunction::from(Polynomial({1.0}),
                                              Polynomial({2.0, -4.0}));
  CHECK(r.den.leading() > 0.0);
  // Sign is flipped, never rescaled: coefficients stay integral.
  CHECK(r.den.coeffs() == std::vector<double>{-2.0, 4.0});
  CHECK(r.num.coeffs() == std::vector<double>{-1.0});

  CHECK_THROWS_AS(RationalFunction::from(Polynomial({1.0}), Polynomial::zero()),
                  DomainError);
  CHECK(RationalFunction::constant(3.0).num == Polynomial::constant(3.0));
}

TEST_CASE("rational arithmetic is consistent at sample points") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);

  RationalFunction a = RationalFunction::from(Polynomial({1.0, 2.0}),
                                              Polynomial({3.0, 0.0, 1.0}));
  RationalFunction b = RationalFunction::from(Polynomial({-0.5, 1.0, 0.25}),
                                              Polynomial({1.0, 4.0}));
  RationalFunction c = RationalFunction::from(Polynomial({2.0, -1.0}),
                                              Polynomial({5.0, 1.0}));

  for (int i = 0; i < 20; ++i) {
    const cplx s(d(rng), d(rng));
    const cplx va = rf_eval(a, s), vb = rf_eval(b, s), vc = rf_eval(c, s);

    const auto close = [&](const cplx& x, const cplx& y) {
      CHECK(std::abs(x - y) <=
            1e-9 * std::max(1.0, std::max(std::abs(x), std::abs(y))));
    };
    close(rf_eval(rf_add(a, b), s), va + vb);
    close(rf_eval(rf_sub(a, b), s), va - vb);
    close(rf_eval(rf_mul(a, b), s), va * vb);
    close(rf_eval(rf_div(a, b), s), va / vb);
    // associativity / commutativity at the value level
    close(rf_eval(rf_add(rf_add(a, b), c), s), (va + vb) + vc);
    close(rf_eval(rf_mul(rf_mul(a, b), c), s), (va * vb) * vc);
    close(rf_eval(rf_add(a, rf_add(b, c)), s), va + (vb + vc));
    close(rf_eval(rf_mul(a, rf_mul(b, c)), s), va * (vb * vc));
    close(rf_eval(rf_add(a, b), s), rf_eval(rf_add(b, a), s));
    close(rf_eval(rf_mul(a, b), s), rf_eval(rf_mul(b, a), s));
  }

  // a + (-a) has an exactly zero numerator (coefficient arithmetic, no
  // cancellation tolerance involved).
  RationalFunction neg_a = rf_mul(RationalFunction::constant(-1.0), a);
  CHECK(rf_add(a, neg_a).num.is_zero());

  CHECK_THROWS_AS(rf_div(a, RationalFunction::constant(0.0)), DomainError);
}

TEST_CASE("rf_eval refuses evaluation on a pole") {
  RationalFunction r = RationalFunction::from(Polynomial({1.0}),
                                              Polynomial({1.0, 1.0}));
  CHECK_THROWS_AS(rf_eval(r, cplx(-1.0, 0.0)), DomainError);
  CHECK(std::abs(rf_eval(r, cplx(0.0, 0.0)) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("rf_reduce cancels exactly repeated factors") {
  // r = (s+1)(s+2) / ((s+1)(s+3))
  RationalFunction num = rf_mul(linear_over_one(-1.0), linear_over_one(-2.0));
  RationalFunction r = rf_div(num, rf_mul(linear_over_one(-1.0),
                                          linear_over_one(-3.0)));
  REQUIRE(r.num.degree() == 2);
  RationalFunction red = rf_reduce(r, 1e-7);
  CHECK(red.num.degree() == 1);
  CHECK(red.den.degree() == 1);
  const cplx s(0.7, 0.4);
  CHECK(std::abs(rf_eval(red, s) - rf_eval(r, s)) <= 1e-12);
}

TEST_CASE("rf_reduce respects the cancellation tolerance") {
  // Roots 1e-9 apart cancel at rel_tol 1e-7; roots 1e-3 apart do not.
  auto build = [](double zero_at, double pole_at) {
    return RationalFunction::from(
        Polynomial({-zero_at, 1.0}) * Polynomial({2.0, 1.0}),
        Polynomial({-pole_at, 1.0}) * Polynomial({3.0, 1.0}));
  };
  RationalFunction nearby = build(0.5, 0.5 + 1e-9);
  RationalFunction apart = build(0.5, 0.5 + 1e-3);

  CHECK(rf_reduce(nearby, 1e-7).num.degree() == 1);
  RationalFunction kept = rf_reduce(apart, 1e-7);
  CHECK(kept.num.degree() == 2);
  CHECK(kept == apart);  // returned unchanged

  CHECK_THROWS_AS(rf_reduce(nearby, 0.0), InputError);
  CHECK_THROWS_AS(rf_reduce(nearby, -1e-3), InputError);
  CHECK_THROWS_AS(rf_reduce(nearby, 2e-2), InputError);
}

TEST_CASE("pade_delay second-order coefficients at 75 microseconds") {
  const double Td = 75e-6;
  RationalFunction d = pade_delay(Td);
  REQUIRE(d.den.degree() == 2);
  REQUIRE(d.num.degree() == 2);
  CHECK(d.den[0] == doctest::Approx(12.0));
  CHECK(d.den[1] == doctest::Approx(6.0 * Td));          // 4.5e-4
  CHECK(d.den[2] == doctest::Approx(Td * Td));           // 5.625e-9
  CHECK(d.num[0] == doctest::Approx(12.0));
  CHECK(d.num[1] == doctest::Approx(-6.0 * Td));
  CHECK(d.num[2] == doctest::Approx(Td * Td));
  CHECK(d.den[1] == doctest::Approx(4.5e-4));
  CHECK(d.den[2] == doctest::Approx(5.625e-9));
}

TEST_CASE("pade_delay is all-pass and phase-accurate against the exact delay") {
  const double Td = 75e-6;
  RationalFunction d = pade_delay(Td);
  for (double f_hz : {10.0, 50.0, 200.0, 500.0, 1000.0, 2000.0}) {
    const double w = 2.0 * kPi * f_hz;
    const cplx h = rf_eval(d, cplx(0.0, w));
    CHECK(std::abs(std::abs(h) - 1.0) <= 1e-12);

    const cplx e = exact_delay(Td, w);
    const double dphi = std::arg(h * std::conj(e));  // wrapped phase error
    CHECK(std::abs(dphi) <= kPi / 180.0);  // within one degree up to 2 kHz
  }
}

TEST_CASE("pade_delay degenerate delays") {
  RationalFunction unity = pade_delay(0.0);
  CHECK(unity.num == Polynomial::constant(1.0));
  CHECK(unity.den == Polynomial::constant(1.0));
  CHECK_THROWS_AS(pade_delay(-1e-9), InputError);
  CHECK(std::abs(exact_delay(0.0, 123.0) - cplx(1.0, 0.0)) == 0.0);
}
