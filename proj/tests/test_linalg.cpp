#include <catch2/catch_amalgamated.hpp>

#include "opcalc/ensemble.hpp"
#include "opcalc/generator.hpp"
#include "opcalc/spectral.hpp"

#include <cmath>

using namespace opcalc;

namespace {

Mat upper_example() {
  Mat A(2, 2);
  A << Complex(-1, 0), Complex(1, 0), Complex(0, 0), Complex(-2, 0);
  return A;
}

}  // namespace

TEST_CASE("matrix exponential action matches a hand-checked value", "[linalg]") {
  Generator G = make_generator(upper_example());
  Vec x(2);
  x << Complex(1, 0), Complex(1, 0);
  Vec y = expm_action(G, 0.7, x);
  CHECK(std::abs(y(0) - Complex(0.74657364364121255247, 0)) < 1e-14);
  CHECK(std::abs(y(1) - Complex(0.24659696394160647694, 0)) < 1e-14);
}

TEST_CASE("semigroup property of the exponential action", "[linalg]") {
  std::mt19937_64 rng(5);
  Generator G = random_stable_generator(rng, 4);
  Vec x = random_unit_vector(rng, 4);
  Vec once = expm_action(G, 1.3, x);
  Vec twice = expm_action(G, 0.8, expm_action(G, 0.5, x));
  CHECK((once - twice).norm() < 1e-12);
  Vec at0 = expm_action(G, 0.0, x);
  CHECK((at0 - x).norm() == 0.0);
}

TEST_CASE("resolvent solve satisfies its defining equation", "[linalg]") {
  Generator G = make_generator(upper_example());
  Vec x(2);
  x << Complex(1, 0), Complex(-2, 1);
  Vec y = resolvent_solve(G, 3.0, x);
  CHECK((3.0 * y - G.A * y - x).norm() < 1e-12);
  // scalar check: (t - a)^{-1} x
  Mat S(1, 1);
  S << Complex(-2, 0);
  Generator Gs = make_generator(S);
  Vec e(1);
  e << Complex(1, 0);
  CHECK(std::abs(resolvent_solve(Gs, 3.0, e)(0) - Complex(0.2, 0)) < 1e-15);
  // t = 0 gives -A^{-1}
  CHECK(std::abs(resolvent_solve(Gs, 0.0, e)(0) - Complex(0.5, 0)) < 1e-15);
}

TEST_CASE("growth certification produces a usable envelope", "[linalg]") {
  Generator G = make_generator(upper_example());
  CHECK(G.growth_omega < 0.0);
  CHECK(G.growth_M >= 1.0);
  CHECK(G.growth_M < 10.0);
  CHECK(G.abscissa == Catch::Approx(-1.0));
  // the envelope really bounds the sampled norms
  for (double t : {0.0, 0.3, 1.0, 5.0, 20.0}) {
    Mat E = expm_matrix(G, t);
    CHECK(E.operatorNorm() <= G.growth_M * std::exp(G.growth_omega * t) * (1.0 + 1e-9));
  }
}

TEST_CASE("strongly stable matrices do not break the certification", "[linalg]") {
  // tiny norms at large t underflow; M must stay finite
  Mat A(2, 2);
  A << Complex(-8, 0), Complex(3, 0), Complex(0, 0), Complex(-9, 0);
  Generator G = make_generator(A);
  CHECK(std::isfinite(G.growth_M));
  CHECK(G.growth_omega < -7.0);
}

TEST_CASE("zero matrix certifies with omega equal to zero", "[linalg]") {
  Mat A = Mat::Zero(2, 2);
  Generator G = make_generator(A);
  CHECK(G.growth_omega == 0.0);
  CHECK(G.growth_M == Catch::Approx(1.0));
  CHECK_FALSE(G.injective);
}

TEST_CASE("spectral oracle reproduces analytic matrix functions", "[linalg]") {
  Generator G = make_generator(upper_example());
  Vec x(2);
  x << Complex(1, 0), Complex(1, 0);
  Vec inv = oracle_apply(G, [](Complex s) { return 1.0 / s; }, x);
  CHECK((G.A * inv - x).norm() < 1e-13);
  Vec ex = oracle_apply(G, [](Complex s) { return std::exp(0.7 * s); }, x);
  CHECK(std::abs(ex(0) - Complex(0.74657364364121255247, 0)) < 1e-13);
}

TEST_CASE("oracle refuses defective matrices", "[linalg]") {
  Mat J(2, 2);
  J << Complex(-1, 0), Complex(1, 0), Complex(0, 0), Complex(-1, 0);
  Generator G = make_generator(J);
  REQUIRE_THROWS_AS(spectral_decompose(G), OracleUnavailable);
  CHECK_FALSE(try_spectral_decompose(G).has_value());
}

TEST_CASE("oracle refuses symbols undefined on the spectrum", "[linalg]") {
  Mat Z = Mat::Zero(1, 1);
  Generator G = make_generator(Z);
  Vec x(1);
  x << Complex(1, 0);
  REQUIRE_THROWS_AS(oracle_apply(G, [](Complex s) { return 1.0 / s; }, x), std::domain_error);
}

TEST_CASE("random stable ensemble respects its advertised bounds", "[linalg]") {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 20; ++i) {
    Generator G = random_stable_generator(rng, 2 + (i % 7));
    CHECK(G.abscissa <= -0.1 + 1e-12);
    SpectralData d = spectral_decompose(G);  // ensemble guarantees diagonalizability
    CHECK(d.condition_estimate <= 1e3 * (1.0 + 1e-9));
  }
}

TEST_CASE("contraction ensemble certifies M = 1", "[linalg]") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i) {
    Generator G = random_symmetric_contraction(rng, 3);
    CHECK(G.growth_M <= 1.0 + 1e-12);
    CHECK(G.decay_delta.has_value());
  }
}

TEST_CASE("decay profile really bounds the semigroup algebraically", "[linalg]") {
  // (C, delta) certifies ||T(t)|| <= C t^{-delta} for all t > 0
  std::mt19937_64 rng(31);
  Generator G = random_symmetric_contraction(rng, 3);
  REQUIRE(G.decay_delta.has_value());
  double C = G.decay_C.value();
  double d = G.decay_delta.value();
  for (double t : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    Mat E = expm_matrix(G, t);
    CHECK(E.operatorNorm() <= C * std::pow(t, -d) * (1.0 + 1e-9));
  }
}
