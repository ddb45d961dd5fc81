#pragma once

#include "opcalc/measure.hpp"
#include "opcalc/quadrature.hpp"
#include "opcalc/types.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace opcalc {

// g in LM: g(s) = int e^{st} da(t), represented by its measure plus a pointwise
// closed-form evaluation (the two are tied together by a self-consistency
// certificate exercised in the test suite).
struct LaplaceSymbol {
  std::string name;
  MeasureRepr measure;
  std::function<Complex(Complex)> eval;
};

// psi in the class of negative Bernstein functions:
//   psi(z) = c0 + int (e^{zu} - 1) u^{-1} drho(u),   c0 = psi(0) <= 0.
// tail_F(r) = int_r^inf u^{-1} drho(u), in closed form for catalog symbols and
// via make_numeric_tail_F otherwise. tilde_info declares the endpoint behavior
// of tail_F viewed as a Laplace density.
struct BernsteinSymbol {
  std::string name;
  double c0 = 0.0;
  MeasureRepr levy;
  std::function<Complex(Complex)> eval;
  std::function<double(double)> tail_F;
  DensityInfo tilde_info;
};

// ---------------------------------------------------------------------------
// Evaluation through the defining transform (self-consistency route)
// ---------------------------------------------------------------------------

namespace detail {

inline const Generator& scalar_generator(double s) {
  // tiny cache: evaluation sweeps hit the same handful of s values
  static std::unordered_map<std::uint64_t, Generator> cache;
  auto key = double_key(s);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Mat A(1, 1);
  A(0, 0) = s;
  return cache.emplace(key, make_generator(std::move(A))).first->second;
}

}  // namespace detail

// Quadrature of int e^{st} da(t) + atom terms; the scalar semigroup e^{st}
// supplies the decay profile for truncation, so divergent transforms surface
// as DivergentIntegral from the tail machinery.
inline Complex symbol_eval_via_measure(const LaplaceSymbol& sym, double s,
                                       QuadratureSpec spec = {}) {
  if (!(s < 0.0)) throw std::invalid_argument("symbol_eval_via_measure: s must be negative");
  const Generator& G = detail::scalar_generator(s);
  TailBound tb{0.0, 0.0, spec.truncation_mode};
  if (sym.measure.density) tb = choose_truncation(G, sym.measure, spec.abs_tol);
  auto Phi = [s](double t) -> Vec {
    Vec v(1);
    v(0) = std::exp(s * t);
    return v;
  };
  IntegrateResult r = integrate_vector(Phi, sym.measure, spec, tb, 1);
  return r.value(0);
}

// c0 + int (e^{su} - 1) u^{-1} drho(u) evaluated by quadrature; atoms follow
// the limiting integrand (an atom at u = 0 contributes s itself).
inline Complex bernstein_eval_via_measure(const BernsteinSymbol& psi, double s,
                                          QuadratureSpec spec = {}) {
  if (!(s <= 0.0)) throw std::invalid_argument("bernstein_eval_via_measure: s must be <= 0");
  Complex out = psi.c0;
  for (const Atom& a : psi.levy.atoms) {
    if (a.location == 0.0)
      out += a.weight * s;
    else
      out += a.weight * cexpm1(s * a.location) / a.location;
  }
  if (psi.levy.density) {
    const MeasureRepr& rho = psi.levy;
    MeasureRepr m;
    m.sign = SignInfo::signed_;
    m.info = rho.info;
    m.info.p_inf = rho.info.p_inf - 1.0;  // |e^{su} - 1| <= 1 for s <= 0
    m.density = [&rho, s](double u) -> Complex { return cexpm1(s * u) / u * rho.density(u); };
    static const Generator& zero = detail::scalar_generator(0.0);
    TailBound tb = choose_truncation(zero, m, spec.abs_tol);
    auto one = [](double) -> Vec { return Vec::Ones(1); };
    IntegrateResult r = integrate_vector(one, m, spec, tb, 1);
    out += r.value(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numeric Levy tail F(r) = int_r^inf u^{-1} drho(u) with cached panel sums
// ---------------------------------------------------------------------------

inline std::function<double(double)> make_numeric_tail_F(const MeasureRepr& rho) {
  struct Cache {
    MeasureRepr rho;
    int k_min = -120, k_max = 64;
    std::vector<double> suffix;  // suffix[k - k_min] = int_{2^k}^{2^{k_max}} u^{-1} drho
    double floor_value = 0.0;    // F at 2^{k_min}
  };
  auto cache = std::make_shared<Cache>();
  cache->rho = rho;
  if (!rho.density) {
    // atoms only
    return [rho](double r) {
      double F = 0.0;
      for (const Atom& a : rho.atoms)
        if (a.location > r && a.location > 0.0) F += a.weight.real() / a.location;
      return F;
    };
  }

  auto octave = [ch = cache.get()](double a, double b) {
    const GaussRule& g = gauss_legendre(32);
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < 32; ++i) {
      double u = c + h * g.x[i];
      s += g.w[i] * (ch->rho.density(u).real() / u);
    }
    return h * s;
  };

  // Grow the cutoff 2^{k_max} until the declared tail pattern certifies the
  // dropped remainder below 1e-15; heavy algebraic tails need a large range.
  {
    const DensityInfo& di = rho.info;
    double p = di.p_inf - 1.0;
    if (!(di.kappa_inf > 0.0) && !(p < -1.0))
      throw std::invalid_argument("make_numeric_tail_F: Levy tail not integrable");
    auto rem_at = [&](int k) {
      double R = std::pow(2.0, k);
      if (di.kappa_inf > 0.0)
        return di.c_inf * std::pow(R, p) * std::exp(-di.kappa_inf * R) / di.kappa_inf;
      return di.c_inf * std::pow(R, p + 1.0) / (-p - 1.0);
    };
    while (!(rem_at(cache->k_max) < 1e-15)) {
      cache->k_max += 64;
      if (cache->k_max > 960)
        throw std::invalid_argument("make_numeric_tail_F: Levy tail too heavy to certify");
    }
  }

  int n = cache->k_max - cache->k_min;
  std::vector<double> per(n, 0.0);
  for (int k = cache->k_min; k < cache->k_max; ++k)
    per[k - cache->k_min] = octave(std::pow(2.0, k), std::pow(2.0, k + 1));
  cache->suffix.assign(n + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) cache->suffix[i] = cache->suffix[i + 1] + per[i];
  cache->floor_value = cache->suffix[0];

  return [cache, octave](double r) -> double {
    if (!(r > 0.0)) throw std::invalid_argument("tail_F: r must be positive");
    double F;
    double r_min = std::pow(2.0, cache->k_min);
    if (r <= r_min) {
      // power extrapolation below the cached range (exact for pure powers)
      double p0 = std::min(cache->rho.info.p0, 0.0);
      F = cache->floor_value * std::pow(r / r_min, p0);
    } else {
      int k = static_cast<int>(std::floor(std::log2(r)));
      k = std::max(cache->k_min, std::min(k, cache->k_max - 1));
      double top = std::pow(2.0, k + 1);
      F = cache->suffix[k + 1 - cache->k_min];
      if (top > r) F += octave(r, top);
    }
    for (const Atom& a : cache->rho.atoms)
      if (a.location > r && a.location > 0.0) F += a.weight.real() / a.location;
    return F;
  };
}

// ---------------------------------------------------------------------------
// psi-tilde: the Laplace symbol with density f(r) = int_r^inf u^{-1} drho(u)
// ---------------------------------------------------------------------------

// Requires psi(0) = 0. A Levy atom at zero turns into a unit-weighted atom of
// the psi-tilde measure at t = 0 (the identity component psi(s) = w s).
inline LaplaceSymbol psi_tilde_density(const BernsteinSymbol& psi) {
  if (psi.c0 != 0.0)
    throw std::invalid_argument("psi_tilde_density: requires psi(0) = 0");
  LaplaceSymbol g;
  g.name = "psi_tilde(" + psi.name + ")";
  auto psi_eval = psi.eval;
  g.eval = [psi_eval](Complex s) -> Complex { return psi_eval(s) / s; };
  g.measure.sign = SignInfo::positive;

  bool has_positive_atoms = false;
  for (const Atom& a : psi.levy.atoms) {
    if (a.location == 0.0)
      g.measure.atoms.push_back({0.0, a.weight});
    else
      has_positive_atoms = true;
  }
  if (psi.levy.density || has_positive_atoms) {
    // Contract: tail_F covers the whole of rho away from zero, including any
    // atoms at positive locations (make_numeric_tail_F does).
    auto F = psi.tail_F;
    g.measure.density = [F](double r) -> Complex { return Complex(F(r), 0.0); };
    g.measure.info = psi.tilde_info;
  }
  return g;
}

}  // namespace opcalc
