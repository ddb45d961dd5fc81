#include <catch2/catch_amalgamated.hpp>

#include "opcalc/catalog.hpp"
#include "opcalc/symbols.hpp"

#include <cmath>

using namespace opcalc;

TEST_CASE("catalog builds every registered symbol", "[symbols]") {
  for (const auto& e : catalog_entries()) {
    std::string spec = e.name;
    // substitute sample parameters into the schema
    if (spec == "frac_power:alpha") spec = "frac_power:0.6";
    if (spec == "neg_frac_power_bernstein:beta") spec = "neg_frac_power_bernstein:0.4";
    if (spec == "exp_tpsi:t:psi") spec = "exp_tpsi:1.5:neg_frac_power_bernstein:0.5";
    REQUIRE_NOTHROW(catalog_build_spec(spec));
  }
  REQUIRE_THROWS_AS(catalog_build_spec("no_such_symbol"), std::invalid_argument);
  REQUIRE_THROWS_AS(catalog_build_spec("frac_power"), std::invalid_argument);
  REQUIRE_THROWS_AS(catalog_build_spec("frac_power:0.5:1"), std::invalid_argument);
  REQUIRE_THROWS_AS(catalog_build_spec("exp_tpsi:1:frac_power:0.5"), std::invalid_argument);
}

TEST_CASE("laplace symbols equal the transform of their measure", "[symbols]") {
  for (const char* spec : {"inverse", "frac_power:0.35", "frac_power:1.7", "recip_log"}) {
    LaplaceSymbol g = std::get<LaplaceSymbol>(catalog_build_spec(spec));
    for (double s : {-0.5, -1.0, -2.0, -7.0}) {
      Complex lhs = g.eval(Complex(s, 0.0));
      Complex rhs = symbol_eval_via_measure(g, s);
      INFO(spec << " at s=" << s);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("bernstein symbols equal their Levy representation", "[symbols]") {
  for (const char* spec :
       {"neg_frac_power_bernstein:0.25", "neg_frac_power_bernstein:0.5", "log_shift",
        "dirac_bernstein"}) {
    BernsteinSymbol p = std::get<BernsteinSymbol>(catalog_build_spec(spec));
    for (double s : {-0.5, -2.0, -4.0}) {
      Complex lhs = p.eval(Complex(s, 0.0));
      Complex rhs = bernstein_eval_via_measure(p, s);
      INFO(spec << " at s=" << s);
      CHECK(std::abs(lhs - rhs) <= 1e-8 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("fractional power symbol evaluates principal powers", "[symbols]") {
  LaplaceSymbol g = laplace_frac_power(0.3);
  CHECK(std::abs(g.eval(Complex(-2, 0)) - Complex(std::pow(2.0, -0.3), 0)) < 1e-15);
  REQUIRE_THROWS_AS(laplace_frac_power(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(laplace_frac_power(-1.0), std::invalid_argument);
}

TEST_CASE("negative bernstein power takes negative values on the left axis", "[symbols]") {
  BernsteinSymbol p = bernstein_neg_frac_power(0.5);
  CHECK(std::abs(p.eval(Complex(-4, 0)) - Complex(-2, 0)) < 1e-14);
  CHECK(p.c0 == 0.0);
  REQUIRE_THROWS_AS(bernstein_neg_frac_power(1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(bernstein_neg_frac_power(0.0), std::invalid_argument);
}

TEST_CASE("log shift matches -log(1-s)", "[symbols]") {
  BernsteinSymbol p = bernstein_log_shift();
  CHECK(std::abs(p.eval(Complex(-1, 0)) - Complex(-std::log(2.0), 0)) < 1e-15);
  // tail integral: int_r^inf e^{-u}/u du decreasing and positive
  CHECK(p.tail_F(1.0) > p.tail_F(2.0));
  CHECK(p.tail_F(2.0) > 0.0);
}

TEST_CASE("two-sided bounds on the special function behind the log kernel", "[symbols]") {
  // values cross-checked against high-precision quadrature of the defining
  // integral: nu(1) and nu(2)
  CHECK(volterra_nu(1.0) == Catch::Approx(2.80777024202851937).epsilon(1e-12));
  CHECK(volterra_nu(2.0) == Catch::Approx(7.43084667884014448).epsilon(1e-12));
  // e^{-t} nu(t) -> 1 from below at large t, stays under 1.2 past 0.5
  for (double t : {0.5, 1.0, 5.0, 20.0, 80.0}) {
    double v = volterra_nu(t) * std::exp(-t);
    CHECK(v > 0.0);
    CHECK(v <= 1.2);
  }
  CHECK(volterra_nu(200.0) * std::exp(-200.0) == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("reciprocal log symbol evaluates and integrates consistently", "[symbols]") {
  LaplaceSymbol g = laplace_recip_log();
  CHECK(std::abs(g.eval(Complex(-1, 0)) - Complex(-1.0 / std::log(2.0), 0)) < 1e-15);
  Complex via = symbol_eval_via_measure(g, -1.0);
  CHECK(std::abs(via - Complex(-1.4426950408889634074, 0)) < 1e-9);
}

TEST_CASE("subordination measure registry", "[symbols]") {
  BernsteinSymbol half = bernstein_neg_frac_power(0.5);
  LaplaceSymbol g1 = laplace_exp_tpsi(1.0, half);
  CHECK(std::abs(g1.eval(Complex(-1, 0)) - Complex(std::exp(-1.0), 0)) < 1e-15);
  // t=0 is the unit atom at 0 regardless of psi
  LaplaceSymbol g0 = laplace_exp_tpsi(0.0, bernstein_log_shift());
  REQUIRE(g0.measure.atoms.size() == 1);
  CHECK(g0.measure.atoms[0].location == 0.0);
  CHECK(g0.measure.atoms[0].weight == Complex(1.0, 0.0));
  // dirac inner symbol shifts the atom to t
  LaplaceSymbol gd = laplace_exp_tpsi(0.7, bernstein_dirac());
  REQUIRE(gd.measure.atoms.size() == 1);
  CHECK(gd.measure.atoms[0].location == 0.7);
  // no registered density for generic beta
  REQUIRE_THROWS_AS(laplace_exp_tpsi(1.0, bernstein_neg_frac_power(0.3)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(laplace_exp_tpsi(-1.0, half), std::invalid_argument);
}

TEST_CASE("stable subordination density is a subprobability that transforms back",
          "[symbols]") {
  // int_0^inf nu_t(v) e^{s v} dv = e^{t psi(s)}; check s=-1, t=2 numerically
  LaplaceSymbol g = laplace_exp_tpsi(2.0, bernstein_neg_frac_power(0.5));
  Complex via = symbol_eval_via_measure(g, -1.0);
  CHECK(std::abs(via - std::exp(Complex(-2.0, 0))) < 1e-9);
}

TEST_CASE("psi tilde divides out one power of s", "[symbols]") {
  BernsteinSymbol p = bernstein_neg_frac_power(0.5);
  LaplaceSymbol t = psi_tilde_density(p);
  // psi(s)/s at s=-1: -(1)^{1/2} / -1 = 1
  CHECK(std::abs(t.eval(Complex(-1, 0)) - Complex(1, 0)) < 1e-14);
  // at s=-4: -2 / -4 = 0.5
  CHECK(std::abs(t.eval(Complex(-4, 0)) - Complex(0.5, 0)) < 1e-14);
  // c0 != 0 has no factorization; the builder must refuse
  BernsteinSymbol shifted = p;
  shifted.c0 = -0.25;
  REQUIRE_THROWS_AS(psi_tilde_density(shifted), std::invalid_argument);
}

TEST_CASE("numeric tail integrals agree with closed forms", "[symbols]") {
  BernsteinSymbol p = bernstein_neg_frac_power(0.4);
  auto F = make_numeric_tail_F(p.levy);
  for (double r : {0.25, 1.0, 4.0, 30.0}) {
    double closed = p.tail_F(r);
    CHECK(F(r) == Catch::Approx(closed).epsilon(1e-9));
  }
}
