#pragma once

#include "opcalc/generator.hpp"
#include "opcalc/measure.hpp"
#include "opcalc/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace opcalc {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_panels = 4096;
  int panel_order = 32;

  enum class Head { substitution, jacobi_weights };
  enum class Truncation { exponential_tail, algebraic_tail };
  Head t_min_exponent_handling = Head::substitution;
  Truncation truncation_mode = Truncation::exponential_tail;

  void validate() const {
    if (rel_tol <= 0.0 || abs_tol <= 0.0) throw std::invalid_argument("tolerances must be positive");
    if (panel_order < 2) throw std::invalid_argument("panel_order must be >= 2");
    if (max_panels < 1) throw std::invalid_argument("max_panels must be >= 1");
  }
};

struct TailBound {
  double T_star = 0.0;
  double bound = 0.0;  // certified bound on the discarded tail norm
  QuadratureSpec::Truncation mode = QuadratureSpec::Truncation::exponential_tail;
};

// ---------------------------------------------------------------------------
// Gauss rules
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> x, w;  // nodes/weights on (-1, 1)
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence.
inline const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

// Gauss-Jacobi rule for the weight (1+x)^b on (-1,1), b > -1, via the
// Golub-Welsch eigenvalue method on the symmetric Jacobi matrix.
inline const GaussRule& gauss_jacobi(int n, double b) {
  static std::map<std::pair<int, std::uint64_t>, GaussRule> cache;
  auto key = std::make_pair(n, double_key(b));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const double a = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  auto alpha = [&](int k) -> double {
    if (k == 0) return (b - a) / (a + b + 2.0);
    double s = 2.0 * k + a + b;
    return (b * b - a * a) / (s * (s + 2.0));
  };
  auto beta = [&](int k) -> double {
    if (k == 1) {
      double s = a + b + 2.0;
      return 4.0 * (a + 1.0) * (b + 1.0) / (s * s * (s + 1.0));
    }
    double s = 2.0 * k + a + b;
    return 4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0));
  };
  for (int k = 0; k < n; ++k) {
    J(k, k) = alpha(k);
    if (k + 1 < n) J(k, k + 1) = J(k + 1, k) = std::sqrt(beta(k + 1));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, b + 1.0) / (b + 1.0);  // total weight mass
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v * v;
  }
  return cache.emplace(key, std::move(r)).first->second;
}

// ---------------------------------------------------------------------------
// Panel core
// ---------------------------------------------------------------------------

// A region of the quadrature variable u with its own integrand. Transform
// jacobians and measure densities are folded into F by the caller.
struct Region {
  double lo = 0.0, hi = 0.0;
  std::function<Vec(double)> F;
  // Optional Gauss-Jacobi treatment of the leftmost panel [0, b]: the panel
  // integrates t^{p0} * F_smooth(t) with the weight handled by the rule.
  bool jacobi_head = false;
  double jacobi_p0 = 0.0;
  std::function<Vec(double)> F_smooth;
  // Optional explicit initial panel boundaries (ascending). When empty a
  // dyadic ladder graded toward lo is used (at most 60 levels).
  std::vector<double> breakpoints;
};

struct IntegrateResult {
  Vec value;
  double error_estimate = 0.0;
  int panels = 0;
};

namespace detail {

struct Panel {
  int region;
  double a, b;
  bool jacobi;
  Vec value;
  double delta;
};

inline Vec gl_panel(const std::function<Vec(double)>& F, double a, double b, int n, int dim) {
  const GaussRule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Vec s = Vec::Zero(dim);
  for (int i = 0; i < n; ++i) s += r.w[i] * F(c + h * r.x[i]);
  return h * s;
}

inline Vec gj_panel(const std::function<Vec(double)>& Fs, double b, double p0, int n, int dim) {
  const GaussRule& r = gauss_jacobi(n, p0);
  const double h = 0.5 * b;
  Vec s = Vec::Zero(dim);
  for (int i = 0; i < n; ++i) s += r.w[i] * Fs(h * (1.0 + r.x[i]));
  return std::pow(h, p0 + 1.0) * s;
}

inline Panel make_panel(const std::vector<Region>& regions, int ri, double a, double b,
                        bool jacobi, int order, int dim) {
  const Region& reg = regions[ri];
  Panel p;
  p.region = ri;
  p.a = a;
  p.b = b;
  p.jacobi = jacobi;
  Vec hi, lo;
  if (jacobi) {
    hi = gj_panel(reg.F_smooth, b, reg.jacobi_p0, order, dim);
    lo = gj_panel(reg.F_smooth, b, reg.jacobi_p0, std::max(2, order / 2), dim);
  } else {
    hi = gl_panel(reg.F, a, b, order, dim);
    lo = gl_panel(reg.F, a, b, std::max(2, order / 2), dim);
  }
  if (!hi.allFinite() || !lo.allFinite())
    throw std::domain_error("integrand evaluated non-finite inside a panel");
  p.value = hi;
  p.delta = (hi - lo).norm();
  return p;
}

inline std::vector<double> dyadic_breakpoints(double lo, double hi) {
  std::vector<double> bp;
  if (!(hi > lo)) return bp;
  if (lo > 0.0 && hi / lo < 2.0) {
    bp = {lo, hi};
    return bp;
  }
  bp.push_back(hi);
  double b = hi;
  for (int k = 0; k < 60; ++k) {
    double nb = 0.5 * b;
    if (nb <= lo * (1.0 + 1e-14)) break;
    bp.push_back(nb);
    b = nb;
  }
  if (bp.back() > lo) bp.push_back(lo);
  std::reverse(bp.begin(), bp.end());
  return bp;
}

}  // namespace detail

// Adaptive panel quadrature over a set of regions. abs_scale rescales the
// absolute tolerance (callers pass max(1, ||x||)). Panels are refined worst
// first; the final reduction runs in a fixed order (region, left endpoint) so
// results are bit-stable for identical inputs.
inline IntegrateResult panel_integrate(const std::vector<Region>& regions,
                                       const QuadratureSpec& spec, int dim,
                                       double abs_scale = 1.0) {
  spec.validate();
  std::vector<detail::Panel> panels;
  const int order = spec.panel_order;

  for (int ri = 0; ri < static_cast<int>(regions.size()); ++ri) {
    const Region& reg = regions[ri];
    if (!(reg.hi > reg.lo)) continue;
    std::vector<double> bp =
        reg.breakpoints.empty() ? detail::dyadic_breakpoints(reg.lo, reg.hi) : reg.breakpoints;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      bool jac = reg.jacobi_head && i == 0 && bp[0] == 0.0;
      panels.push_back(detail::make_panel(regions, ri, bp[i], bp[i + 1], jac, order, dim));
    }
  }

  auto total_of = [&]() {
    Vec t = Vec::Zero(dim);
    for (const auto& p : panels) t += p.value;
    return t;
  };

  Vec total = total_of();
  double sum_delta = 0.0;
  for (const auto& p : panels) sum_delta += p.delta;

  while (true) {
    double target = std::max(spec.abs_tol * abs_scale, spec.rel_tol * total.norm());
    if (sum_delta <= target || panels.empty()) break;
    if (static_cast<int>(panels.size()) >= spec.max_panels)
      throw NonConvergentIntegral("panel budget exhausted before tolerance", sum_delta,
                                  static_cast<int>(panels.size()));
    // worst panel, ties broken by left endpoint for determinism
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i) {
      if (panels[i].delta > panels[worst].delta ||
          (panels[i].delta == panels[worst].delta && panels[i].a < panels[worst].a))
        worst = i;
    }
    detail::Panel old = panels[worst];
    double mid = old.jacobi ? 0.5 * old.b : 0.5 * (old.a + old.b);
    detail::Panel left = detail::make_panel(regions, old.region, old.a, mid, old.jacobi, order, dim);
    detail::Panel right = detail::make_panel(regions, old.region, mid, old.b, false, order, dim);
    total += left.value + right.value - old.value;
    sum_delta += left.delta + right.delta - old.delta;
    panels[worst] = left;
    panels.push_back(right);
  }

  std::sort(panels.begin(), panels.end(), [](const detail::Panel& a, const detail::Panel& b) {
    if (a.region != b.region) return a.region < b.region;
    return a.a < b.a;
  });
  IntegrateResult res;
  res.value = Vec::Zero(dim);
  for (const auto& p : panels) res.value += p.value;
  res.error_estimate = 0.0;
  for (const auto& p : panels) res.error_estimate += p.delta;
  res.panels = static_cast<int>(panels.size());
  return res;
}

// ---------------------------------------------------------------------------
// Truncation bounds
// ---------------------------------------------------------------------------

// Certified bound on || integral_{T*}^inf profile(t) * |density(t)| dt || for the
// catalog exponent patterns: profile M e^{w t} (and optionally C t^{-delta})
// against |density| <= c t^p e^{-k t}. Conservative closed forms only.
inline TailBound tail_bound_for(const Generator& A, const MeasureRepr& mu, double T_star) {
  TailBound tb;
  tb.T_star = T_star;
  if (!mu.density) {
    tb.bound = 0.0;
    return tb;
  }
  if (T_star < mu.info.t_ref)
    throw std::invalid_argument("tail_bound_for: T_star below the density's declared t_ref");

  const double p = mu.info.p_inf, kappa = mu.info.kappa_inf, c = mu.info.c_inf;
  const double omega = A.growth_omega, M = A.growth_M;
  const double lambda = kappa - omega;

  if (lambda > 0.0) {
    // J = int_{T*}^inf t^p e^{-lambda t} dt
    double J;
    if (p <= 0.0) {
      J = std::pow(T_star, p) * std::exp(-lambda * T_star) / lambda;
    } else if (T_star * lambda >= 2.0 * p) {
      // t^p e^{-lambda t/2} is decreasing past 2p/lambda
      J = std::pow(T_star, p) * std::exp(-lambda * T_star) * 2.0 / lambda;
    } else {
      J = std::tgamma(p + 1.0) / std::pow(lambda, p + 1.0);  // whole-axis fallback
    }
    tb.bound = M * c * J;
    tb.mode = QuadratureSpec::Truncation::exponential_tail;
    return tb;
  }

  // lambda == 0: algebraic decay must carry the tail.
  double best = -1.0;
  if (p < -1.0) {
    double b = M * c * std::pow(T_star, p + 1.0) / (-p - 1.0);
    best = b;
  }
  if (A.decay_C && A.decay_delta) {
    double q = p - *A.decay_delta;
    if (q < -1.0 && T_star > 0.0) {
      double b = (*A.decay_C) * c * std::pow(T_star, q + 1.0) / (-q - 1.0);
      if (best < 0.0 || b < best) best = b;
    }
  }
  if (best < 0.0)
    throw DivergentIntegral("profile x density not integrable at infinity");
  tb.bound = best;
  tb.mode = QuadratureSpec::Truncation::algebraic_tail;
  return tb;
}

// Smallest power-of-two truncation point whose certified tail bound meets the
// target (capped; the residual bound is folded into the reported error).
inline TailBound choose_truncation(const Generator& A, const MeasureRepr& mu, double target,
                                   double t_min = 1.0) {
  double T = std::max({1.0, t_min, mu.info.t_ref});
  TailBound tb = tail_bound_for(A, mu, T);
  while (tb.bound > target && T < 1e60) {
    T *= 2.0;
    tb = tail_bound_for(A, mu, T);
  }
  return tb;
}

// ---------------------------------------------------------------------------
// Measure-driven vector integration
// ---------------------------------------------------------------------------

// Evaluates  sum_k w_k Phi(loc_k) + int_(lo, T*] Phi(t) density(t) dt  with the
// head treatment declared by the measure. Atom contributions are exact and
// never truncated. The reported error is the panel refinement delta plus the
// certified tail bound.
inline IntegrateResult integrate_vector(const std::function<Vec(double)>& Phi,
                                        const MeasureRepr& mu, const QuadratureSpec& spec,
                                        const TailBound& tail, int dim, double abs_scale = 1.0,
                                        double lo = 0.0) {
  std::vector<Region> regions;
  const double T = tail.T_star;

  if (mu.density && T > lo) {
    const DensityInfo& di = mu.info;
    const bool head_active = lo == 0.0;
    if (head_active && di.head == HeadKind::power && di.p0 > -1.0 && di.p0 < 0.0 &&
        spec.t_min_exponent_handling == QuadratureSpec::Head::substitution) {
      // t = u^m with m = 1/(1+p0) flattens the endpoint power exactly.
      const double m = 1.0 / (1.0 + di.p0);
      Region r;
      r.lo = 0.0;
      r.hi = std::pow(T, 1.0 / m);
      r.F = [&Phi, &mu, m, dim](double u) -> Vec {
        double t = std::pow(u, m);
        if (t <= 0.0 || !std::isfinite(t)) return Vec::Zero(dim);
        double jac = m * std::pow(u, m - 1.0);
        return Phi(t) * (mu.density(t) * jac);
      };
      regions.push_back(std::move(r));
    } else if (head_active && di.head == HeadKind::power && di.p0 > -1.0 && di.p0 < 0.0) {
      // Gauss-Jacobi weighting on the leftmost panel; plain panels elsewhere.
      Region r;
      r.lo = 0.0;
      r.hi = T;
      r.jacobi_head = true;
      r.jacobi_p0 = di.p0;
      r.F = [&Phi, &mu](double t) -> Vec { return Phi(t) * mu.density(t); };
      const double p0 = di.p0;
      r.F_smooth = [&Phi, &mu, p0, dim](double t) -> Vec {
        if (t <= 0.0) return Vec::Zero(dim);
        return Phi(t) * (mu.density(t) * std::pow(t, -p0));
      };
      regions.push_back(std::move(r));
    } else if (head_active && di.head == HeadKind::loginv) {
      if (!mu.head_density_u)
        throw std::invalid_argument("loginv head declared without head_density_u");
      const double t_split = std::exp(-1.0);
      double u_hi = T >= t_split ? 1.0 : -1.0 / std::log(T);
      Region r;
      r.lo = 0.0;
      r.hi = u_hi;
      r.F = [&Phi, &mu, dim](double u) -> Vec {
        if (u <= 0.0) return Vec::Zero(dim);
        double t = std::exp(-1.0 / u);
        return Phi(t) * mu.head_density_u(u);
      };
      regions.push_back(std::move(r));
      if (T > t_split) {
        Region r2;
        r2.lo = t_split;
        r2.hi = T;
        r2.F = [&Phi, &mu](double t) -> Vec { return Phi(t) * mu.density(t); };
        regions.push_back(std::move(r2));
      }
    } else {
      Region r;
      r.lo = lo;
      r.hi = T;
      r.F = [&Phi, &mu](double t) -> Vec { return Phi(t) * mu.density(t); };
      regions.push_back(std::move(r));
    }
  }

  IntegrateResult res = panel_integrate(regions, spec, dim, abs_scale);
  for (const Atom& a : mu.atoms) {
    if (a.location < lo) continue;
    res.value += a.weight * Phi(a.location);
  }
  res.error_estimate += tail.bound;
  return res;
}

}  // namespace opcalc
