#include <catch2/catch_amalgamated.hpp>

#include "opcalc/bp.hpp"
#include "opcalc/catalog.hpp"
#include "opcalc/ensemble.hpp"

#include <cmath>

using namespace opcalc;

namespace {

Generator scalar(double a) {
  Mat A(1, 1);
  A << Complex(a, 0);
  return make_generator(A);
}

Vec ones(int n) { return Vec::Constant(n, Complex(1, 0)); }

}  // namespace

TEST_CASE("scalar bernstein evaluations through the integral", "[bp]") {
  Generator G = scalar(-1.0);
  Vec x = ones(1);
  ApplyResult r = bp_apply(G, bernstein_log_shift(), x, {{}, true});
  REQUIRE(r.domain_verdict == Verdict::converged);
  CHECK(std::abs(r.value(0) - Complex(-std::log(2.0), 0)) < 1e-9);
  CHECK(*r.oracle_delta < 1e-8);

  Generator G4 = scalar(-4.0);
  ApplyResult r2 = bp_apply(G4, bernstein_neg_frac_power(0.5), x, {{}, true});
  CHECK(std::abs(r2.value(0) - Complex(-2, 0)) < 1e-8);
}

TEST_CASE("dirac symbol reproduces the generator", "[bp]") {
  std::mt19937_64 rng(8);
  Generator G = random_stable_generator(rng, 3);
  Vec x = random_unit_vector(rng, 3);
  ApplyResult r = bp_apply(G, bernstein_dirac(), x, {});
  CHECK((r.value - G.A * x).norm() < 1e-13);
}

TEST_CASE("matrix bernstein evaluation matches the oracle", "[bp]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    Generator G = random_stable_generator(rng, 4);
    Vec x = random_unit_vector(rng, 4);
    for (double beta : {0.3, 0.5, 0.7}) {
      ApplyResult r = bp_apply(G, bernstein_neg_frac_power(beta), x, {{}, true});
      REQUIRE(r.domain_verdict == Verdict::converged);
      REQUIRE(r.oracle_delta.has_value());
      CHECK(*r.oracle_delta < 1e-7);
    }
  }
}

TEST_CASE("factorization through psi tilde", "[bp]") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 4; ++trial) {
    Generator G = random_stable_generator(rng, 3);
    Vec x = random_unit_vector(rng, 3);
    for (const BernsteinSymbol& psi :
         {bernstein_neg_frac_power(0.25), bernstein_neg_frac_power(0.75),
          bernstein_log_shift()}) {
      ApplyResult t = psi_tilde_apply(G, psi, x, {});
      ApplyResult p = bp_apply(G, psi, x, {});
      REQUIRE(t.domain_verdict == Verdict::converged);
      CHECK((G.A * t.value - p.value).norm() <= 1e-7 * (1.0 + x.norm()));
    }
  }
}

TEST_CASE("materialized bernstein matrix is the calculus column by column", "[bp]") {
  Mat A(2, 2);
  A << Complex(-1, 0), Complex(1, 0), Complex(0, 0), Complex(-2, 0);
  Generator G = make_generator(A);
  BernsteinSymbol psi = bernstein_neg_frac_power(0.5);
  Mat P = bernstein_matrix(G, psi, {});
  // oracle: -(-A)^{1/2}
  SpectralData d = spectral_decompose(G);
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::Zero(2);
    e(j) = 1.0;
    Vec ref = oracle_apply(G, d, psi.eval, e);
    CHECK((P.col(j) - ref).norm() < 1e-8);
  }
}

TEST_CASE("subordinated semigroup: direct and measure routes agree", "[bp]") {
  Mat A(2, 2);
  A << Complex(-2, 0), Complex(0.5, 0), Complex(0, 0), Complex(-1, 0);
  Generator G = make_generator(A);
  Vec x = ones(2);
  BernsteinSymbol half = bernstein_neg_frac_power(0.5);
  for (double t : {0.5, 1.0, 2.0}) {
    ApplyResult d = subordinated_apply(G, half, t, x, SubordinationRoute::direct, {{}, true});
    ApplyResult s =
        subordinated_apply(G, half, t, x, SubordinationRoute::subordination, {{}, true});
    REQUIRE(d.domain_verdict == Verdict::converged);
    REQUIRE(s.domain_verdict == Verdict::converged);
    CHECK((d.value - s.value).norm() < 1e-7);
    CHECK(*d.oracle_delta < 1e-8);
    CHECK(*s.oracle_delta < 1e-7);
  }
}

TEST_CASE("subordination at t = 0 is the identity", "[bp]") {
  std::mt19937_64 rng(3);
  Generator G = random_stable_generator(rng, 3);
  Vec x = random_unit_vector(rng, 3);
  ApplyResult r =
      subordinated_apply(G, bernstein_neg_frac_power(0.5), 0.0, x, SubordinationRoute::direct, {});
  CHECK((r.value - x).norm() < 1e-12);
  ApplyResult rs = subordinated_apply(G, bernstein_neg_frac_power(0.5), 0.0, x,
                                      SubordinationRoute::subordination, {});
  CHECK((rs.value - x).norm() < 1e-12);
}

TEST_CASE("subordinated semigroup law", "[bp]") {
  std::mt19937_64 rng(12);
  Generator G = random_stable_generator(rng, 3);
  Vec x = random_unit_vector(rng, 3);
  BernsteinSymbol half = bernstein_neg_frac_power(0.5);
  Vec at_sum =
      subordinated_apply(G, half, 1.5, x, SubordinationRoute::direct, {}).value;
  Vec seq = subordinated_apply(
                G, half, 0.5,
                subordinated_apply(G, half, 1.0, x, SubordinationRoute::direct, {}).value,
                SubordinationRoute::direct, {})
                .value;
  CHECK((at_sum - seq).norm() < 1e-9);
}

TEST_CASE("contractivity transfers to the subordinated semigroup", "[bp]") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    Generator G = random_symmetric_contraction(rng, 3);
    REQUIRE(G.growth_M <= 1.0 + 1e-12);
    Vec x = random_unit_vector(rng, 3);
    ApplyResult r =
        subordinated_apply(G, bernstein_neg_frac_power(0.5), 1.0, x, SubordinationRoute::direct,
                           {});
    CHECK(r.value.norm() <= x.norm() + 10.0 * r.error_estimate + 1e-12);
  }
}

TEST_CASE("measure route refuses symbols without a registered density", "[bp]") {
  Generator G = scalar(-1.0);
  Vec x = ones(1);
  REQUIRE_THROWS_AS(subordinated_apply(G, bernstein_neg_frac_power(0.3), 1.0, x,
                                       SubordinationRoute::subordination, {}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      subordinated_apply(G, bernstein_neg_frac_power(0.5), -0.5, x, SubordinationRoute::direct,
                         {}),
      std::invalid_argument);
}

TEST_CASE("gamma-law subordination for the log symbol", "[bp]") {
  // e^{t psi(A)} with psi = -log(1-s) is (I-A)^{-t}; scalar check at A=-1, t=0.7
  Generator G = scalar(-1.0);
  Vec x = ones(1);
  ApplyResult s = subordinated_apply(G, bernstein_log_shift(), 0.7, x,
                                     SubordinationRoute::subordination, {{}, true});
  REQUIRE(s.domain_verdict == Verdict::converged);
  CHECK(std::abs(s.value(0) - Complex(std::pow(2.0, -0.7), 0)) < 1e-9);
}

TEST_CASE("bernstein apply on the zero generator returns psi(0) x", "[bp]") {
  Generator G = scalar(0.0);
  Vec x = ones(1);
  ApplyResult r = bp_apply(G, bernstein_neg_frac_power(0.5), x, {});
  REQUIRE(r.domain_verdict == Verdict::converged);
  CHECK(std::abs(r.value(0)) < 1e-9);  // psi(0) = 0
}
