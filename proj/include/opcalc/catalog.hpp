#pragma once

#include "opcalc/symbols.hpp"
#include "opcalc/types.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace opcalc {

// ---------------------------------------------------------------------------
// Volterra function nu(t, -1)
// ---------------------------------------------------------------------------

// log nu(t,-1) from L = log t, where nu(t,-1) = int_0^inf t^{xi-1}/Gamma(xi) dxi.
// The xi-integrand exp((xi-1)L - lgamma(xi)) peaks where digamma(xi) = L; panels
// are sigma-scaled around the peak with geometric flanks, summed in shifted log
// space so nu ~ e^t never overflows. The upper cutoff max(50, 10t) is extended
// until the last octave is below 1e-13 of the total (the integrand decays at
// least geometrically there with ratio <= 1/10).
inline double volterra_nu_log_from_ln(double L) {
  if (!(L <= 700.0)) throw std::domain_error("volterra_nu_log_from_ln: argument out of range");
  // peak location by bisection on the monotone digamma
  double a = 1e-8, b = std::max(10.0, 2.0 * std::exp(std::min(L, 700.0)));
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (a + b);
    (boost::math::digamma(m) < L ? a : b) = m;
    if (b - a < 1e-12 * b) break;
  }
  const double xi0 = 0.5 * (a + b);
  const double sigma = 1.0 / std::sqrt(boost::math::trigamma(xi0));

  std::vector<double> bp;
  bp.push_back(0.0);
  double head = std::max(xi0 / 1024.0, 1e-12);
  double left = std::max(head, xi0 - 8.0 * sigma);
  for (double v = head; v < left; v *= 2.0) bp.push_back(v);
  for (double v = left; v < xi0 + 8.0 * sigma; v += sigma) bp.push_back(v);
  bp.push_back(xi0 + 8.0 * sigma);

  const double t_cap = L > 690.0 ? 1e300 : std::exp(L);
  const double Xi = std::max(50.0, 10.0 * t_cap);

  auto g = [L](double xi) { return (xi - 1.0) * L - std::lgamma(xi); };
  const GaussRule& rule = gauss_legendre(20);

  struct P {
    double a, b;
    std::vector<double> gv;
  };
  std::vector<P> panels;
  double gmax = -1e308;
  auto add_panel = [&](double pa, double pb) {
    P p;
    p.a = pa;
    p.b = pb;
    p.gv.resize(rule.x.size());
    double c = 0.5 * (pa + pb), h = 0.5 * (pb - pa);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double xi = c + h * rule.x[i];
      p.gv[i] = xi > 0.0 ? g(xi) : -1e308;
      gmax = std::max(gmax, p.gv[i]);
    }
    panels.push_back(std::move(p));
  };
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) add_panel(bp[i], bp[i + 1]);

  auto panel_sum = [&](const P& p) {
    double h = 0.5 * (p.b - p.a), s = 0.0;
    for (std::size_t i = 0; i < rule.w.size(); ++i) s += rule.w[i] * std::exp(p.gv[i] - gmax);
    return h * s;
  };

  // geometric extension to (at least) Xi, then until negligible
  double edge = bp.back();
  double total_head = 0.0;
  for (const P& p : panels) total_head += panel_sum(p);
  while (true) {
    double next = edge * 2.0;
    add_panel(edge, next);
    double c = panel_sum(panels.back());
    total_head += c;
    edge = next;
    if (edge >= Xi && c <= 1e-13 * total_head) break;
    if (edge > 1e305) break;
  }

  double total = 0.0;
  for (const P& p : panels) total += panel_sum(p);
  return gmax + std::log(total);
}

namespace detail {

// Quadrature layouts reuse the same abscissae across operators (dyadic panel
// edges, shared Gauss nodes), so memoizing on the exact bit pattern of L turns
// repeated sweeps into hash lookups.
inline double nu_log_cached(double L) {
  static std::unordered_map<std::uint64_t, double> cache;
  auto [it, inserted] = cache.try_emplace(double_key(L), 0.0);
  if (inserted) it->second = volterra_nu_log_from_ln(L);
  return it->second;
}

}  // namespace detail

// nu(t,-1) itself; overflows past t ~ 700 by construction of the result.
inline double volterra_nu(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("volterra_nu: t must be positive");
  return std::exp(detail::nu_log_cached(std::log(t)));
}

// ---------------------------------------------------------------------------
// Catalog builders
// ---------------------------------------------------------------------------

inline LaplaceSymbol laplace_inverse() {
  LaplaceSymbol g;
  g.name = "inverse";
  g.measure = density_measure([](double) -> Complex { return -1.0; },
                              DensityInfo{0.0, 0.0, 0.0, 1.0, 0.0, HeadKind::none},
                              SignInfo::signed_);
  g.eval = [](Complex s) { return 1.0 / s; };
  return g;
}

inline LaplaceSymbol laplace_frac_power(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("frac_power: alpha must be positive");
  LaplaceSymbol g;
  g.name = "frac_power:" + format_real(alpha);
  const double c = 1.0 / std::tgamma(alpha);
  DensityInfo info{alpha - 1.0, alpha - 1.0, 0.0, c, 0.0,
                   alpha < 1.0 ? HeadKind::power : HeadKind::none};
  g.measure = density_measure([c, alpha](double t) -> Complex { return c * std::pow(t, alpha - 1.0); },
                              info, SignInfo::positive);
  g.eval = [alpha](Complex s) { return std::exp(-alpha * std::log(-s)); };
  return g;
}

namespace detail {

// |e^{-t} nu(t,-1)|-type kernels: sign +1 realizes (log(I-A))^{-1}, sign -1
// realizes 1/psi for psi = -log(1-s).
inline LaplaceSymbol volterra_kernel_symbol(double sign, const std::string& name) {
  LaplaceSymbol g;
  g.name = name;
  MeasureRepr m;
  m.sign = sign > 0 ? SignInfo::positive : SignInfo::signed_;
  m.density = [sign](double t) -> Complex {
    return sign * std::exp(detail::nu_log_cached(std::log(t)) - t);
  };
  // e^{-t} nu(t,-1) decreases to 1 for large t and behaves like 1/(t log^2 t)
  // near zero; the loginv head carries the transformed integrand.
  m.info = DensityInfo{-1.0, 0.0, 0.0, 1.2, 0.5, HeadKind::loginv};
  m.head_density_u = [sign](double u) -> Complex {
    double L = -1.0 / u;
    double t = std::exp(L);  // may underflow; e^{-t} -> 1 is then exact
    return sign * std::exp(detail::nu_log_cached(L) + L - t) / (u * u);
  };
  g.measure = std::move(m);
  g.eval = [sign](Complex s) { return sign / std::log(1.0 - s); };
  return g;
}

}  // namespace detail

// Density -e^{-t} nu(t,-1): the Laplace representation of 1/psi for
// psi(s) = -log(1-s).
inline LaplaceSymbol laplace_recip_log() {
  return detail::volterra_kernel_symbol(-1.0, "recip_log");
}

// Density +e^{-t} nu(t,-1): the kernel of (log(I-A))^{-1}.
inline LaplaceSymbol laplace_log_inverse_kernel() {
  return detail::volterra_kernel_symbol(+1.0, "log_inverse_kernel");
}

inline BernsteinSymbol bernstein_log_shift() {
  BernsteinSymbol p;
  p.name = "log_shift";
  p.c0 = 0.0;
  p.levy = density_measure([](double u) -> Complex { return std::exp(-u); },
                           DensityInfo{0.0, 0.0, 1.0, 1.0, 0.0, HeadKind::none},
                           SignInfo::positive);
  p.eval = [](Complex s) { return -std::log(1.0 - s); };
  p.tail_F = [](double r) { return boost::math::expint(1, r); };
  // E1(r) ~ -log r near zero, <= e^{-r}/r at infinity
  p.tilde_info = DensityInfo{-0.05, -1.0, 1.0, 1.0, 0.0, HeadKind::none};
  return p;
}

inline BernsteinSymbol bernstein_neg_frac_power(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("neg_frac_power_bernstein: beta must lie in (0,1)");
  BernsteinSymbol p;
  p.name = "neg_frac_power_bernstein:" + format_real(beta);
  p.c0 = 0.0;
  const double c = beta / std::tgamma(1.0 - beta);
  p.levy = density_measure([c, beta](double u) -> Complex { return c * std::pow(u, -beta); },
                           DensityInfo{-beta, -beta, 0.0, c, 0.0, HeadKind::power},
                           SignInfo::positive);
  p.eval = [beta](Complex s) { return -std::exp(beta * std::log(-s)); };
  const double cf = 1.0 / std::tgamma(1.0 - beta);
  p.tail_F = [cf, beta](double r) { return cf * std::pow(r, -beta); };
  p.tilde_info = DensityInfo{-beta, -beta, 0.0, cf, 0.0, HeadKind::power};
  return p;
}

// The Dirac choice of rho realizes psi(s) = s through the limiting integrand
// (e^{su} - 1)/u -> s at u = 0.
inline BernsteinSymbol bernstein_dirac() {
  BernsteinSymbol p;
  p.name = "dirac_bernstein";
  p.c0 = 0.0;
  p.levy = atom_measure({Atom{0.0, 1.0}});
  p.eval = [](Complex s) { return s; };
  p.tail_F = [](double) { return 0.0; };
  return p;
}

// g_t(s) = e^{t psi(s)}, the subordinated-semigroup symbol. Only the inner
// symbols with a registered closed-form subordination measure are supported:
// the 1/2-stable density for neg_frac_power_bernstein(1/2), the Gamma density
// for log_shift, and the point mass for the Dirac case.
inline LaplaceSymbol laplace_exp_tpsi(double t, const BernsteinSymbol& psi) {
  if (!(t >= 0.0)) throw std::invalid_argument("exp_tpsi: t must be >= 0");
  LaplaceSymbol g;
  g.name = "exp_tpsi:" + format_real(t) + ":" + psi.name;
  auto psi_eval = psi.eval;
  g.eval = [t, psi_eval](Complex s) { return std::exp(t * psi_eval(s)); };
  if (t == 0.0) {
    g.measure = atom_measure({Atom{0.0, 1.0}});
    return g;
  }
  if (psi.name == "dirac_bernstein") {
    g.measure = atom_measure({Atom{t, 1.0}});
    return g;
  }
  if (psi.name.rfind("neg_frac_power_bernstein:", 0) == 0) {
    double beta = std::stod(psi.name.substr(psi.name.find(':') + 1));
    if (std::abs(beta - 0.5) > 1e-14)
      throw std::invalid_argument("exp_tpsi: no registered subordination measure for beta != 1/2");
    const double pref = std::log(t / (2.0 * std::sqrt(M_PI)));
    MeasureRepr m;
    m.sign = SignInfo::positive;
    m.density = [pref, t](double v) -> Complex {
      double e = pref - 1.5 * std::log(v) - t * t / (4.0 * v);
      return e < -745.0 ? 0.0 : std::exp(e);
    };
    m.info = DensityInfo{0.0, -1.5, 0.0, t / (2.0 * std::sqrt(M_PI)), 0.0, HeadKind::none};
    g.measure = std::move(m);
    return g;
  }
  if (psi.name == "log_shift") {
    // e^{-t log(1-s)} = (1-s)^{-t}: Gamma(t, 1) density
    const double c = 1.0 / std::tgamma(t);
    MeasureRepr m;
    m.sign = SignInfo::positive;
    m.density = [c, t](double v) -> Complex { return c * std::pow(v, t - 1.0) * std::exp(-v); };
    m.info = DensityInfo{t - 1.0, t - 1.0, 1.0, c, 0.0,
                         t < 1.0 ? HeadKind::power : HeadKind::none};
    g.measure = std::move(m);
    return g;
  }
  throw std::invalid_argument("exp_tpsi: no registered subordination measure for " + psi.name);
}

// ---------------------------------------------------------------------------
// Name-driven construction (the CLI contract)
// ---------------------------------------------------------------------------

using SymbolVariant = std::variant<LaplaceSymbol, BernsteinSymbol>;

inline SymbolVariant catalog_build(const std::string& name, const std::vector<double>& params) {
  auto want = [&](std::size_t n) {
    if (params.size() != n)
      throw std::invalid_argument("catalog_build: wrong parameter count for " + name);
  };
  if (name == "inverse") {
    want(0);
    return laplace_inverse();
  }
  if (name == "frac_power") {
    want(1);
    return laplace_frac_power(params[0]);
  }
  if (name == "neg_frac_power_bernstein") {
    want(1);
    return bernstein_neg_frac_power(params[0]);
  }
  if (name == "log_shift") {
    want(0);
    return bernstein_log_shift();
  }
  if (name == "recip_log") {
    want(0);
    return laplace_recip_log();
  }
  if (name == "dirac_bernstein") {
    want(0);
    return bernstein_dirac();
  }
  throw std::invalid_argument("catalog_build: unknown symbol " + name);
}

// Parses "name[:p1[:p2...]]"; exp_tpsi recurses on the trailing inner spec.
inline SymbolVariant catalog_build_spec(const std::string& spec) {
  std::vector<std::string> tok;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t next = spec.find(':', pos);
    if (next == std::string::npos) next = spec.size();
    tok.push_back(spec.substr(pos, next - pos));
    pos = next + 1;
  }
  if (tok.empty() || tok[0].empty()) throw std::invalid_argument("empty symbol spec");
  if (tok[0] == "exp_tpsi") {
    if (tok.size() < 3) throw std::invalid_argument("exp_tpsi requires exp_tpsi:t:psi_spec");
    double t = std::stod(tok[1]);
    std::string inner;
    for (std::size_t i = 2; i < tok.size(); ++i) inner += (i > 2 ? ":" : "") + tok[i];
    SymbolVariant v = catalog_build_spec(inner);
    if (!std::holds_alternative<BernsteinSymbol>(v))
      throw std::invalid_argument("exp_tpsi: inner symbol must be a bernstein symbol");
    return laplace_exp_tpsi(t, std::get<BernsteinSymbol>(v));
  }
  std::vector<double> params;
  for (std::size_t i = 1; i < tok.size(); ++i) params.push_back(std::stod(tok[i]));
  return catalog_build(tok[0], params);
}

struct SymbolCatalogEntry {
  std::string name;
  std::string kind;
  std::string params_doc;
  std::string annotation;
};

inline const std::vector<SymbolCatalogEntry>& catalog_entries() {
  static const std::vector<SymbolCatalogEntry> entries = {
      {"inverse", "laplace", "", "Example 1"},
      {"frac_power:alpha", "laplace", "alpha > 0", "Example 2"},
      {"neg_frac_power_bernstein:beta", "bernstein", "0 < beta < 1", "Example 3"},
      {"log_shift", "bernstein", "", "Example 4"},
      {"recip_log", "laplace", "", "Example 4"},
      {"exp_tpsi:t:psi", "laplace", "t >= 0; inner bernstein spec",
       "Definition 2 (subordination)"},
      {"dirac_bernstein", "bernstein", "", "Corollary 8"},
  };
  return entries;
}

}  // namespace opcalc
