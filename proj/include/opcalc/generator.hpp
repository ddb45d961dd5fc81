#pragma once

#include "opcalc/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <optional>
#include <unordered_map>
#include <vector>

namespace opcalc {

inline double opnorm2(const Mat& A) {
  if (A.rows() == 1 && A.cols() == 1) return std::abs(A(0, 0));
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

// A square matrix A regarded as the generator of T(t) = e^{tA}, together with
// a certified growth profile ||T(t)|| <= M e^{w t} (w <= 0) and an optional
// algebraic-decay profile ||T(t)|| <= C / t^delta.
struct Generator {
  Mat A;
  int dim = 0;
  double growth_M = 1.0;
  double growth_omega = 0.0;
  double abscissa = 0.0;  // max Re(spectrum)
  std::optional<double> decay_C;
  std::optional<double> decay_delta;
  bool injective = false;
  double norm_A = 0.0;  // ||A||_2

  // Memoized full exponentials keyed by the bit pattern of t. All engine code
  // is single-threaded; the cache is an implementation detail of repeated
  // quadrature sweeps over one operator.
  mutable std::unordered_map<std::uint64_t, Mat> expm_cache;
};

inline const Mat& expm_matrix(const Generator& G, double t) {
  auto key = double_key(t);
  auto it = G.expm_cache.find(key);
  if (it != G.expm_cache.end()) return it->second;
  Mat E = (t * G.A).exp();  // scaling-and-squaring Pade
  return G.expm_cache.emplace(key, std::move(E)).first->second;
}

namespace detail {

// Action-only truncated-Taylor path with scaling, for dimensions where the
// full exponential is not worth materializing.
inline Vec expm_action_taylor(const Mat& A, double t, const Vec& x) {
  double scale = t * A.cwiseAbs().rowwise().sum().maxCoeff();  // ||tA||_inf
  int s = scale > 4.0 ? static_cast<int>(std::ceil(std::log2(scale / 4.0))) : 0;
  Mat B = (t / std::pow(2.0, s)) * A;
  Vec y = x;
  for (int step = 0; step < (1 << s); ++step) {
    Vec z = y, term = y;
    for (int k = 1; k <= 120; ++k) {
      term = B * term / static_cast<double>(k);
      z += term;
      if (term.norm() <= 1e-18 * z.norm()) break;
    }
    y = z;
  }
  return y;
}

}  // namespace detail

// e^{tA} x. Exact pass-through at t = 0.
inline Vec expm_action(const Generator& G, double t, const Vec& x) {
  if (t < 0.0) throw std::invalid_argument("expm_action: t must be >= 0");
  if (x.size() != G.dim) throw std::invalid_argument("expm_action: dimension mismatch");
  if (t == 0.0) return x;
  if (G.dim <= 64) return expm_matrix(G, t) * x;
  return detail::expm_action_taylor(G.A, t, x);
}

// Solves (tI - A) y = x with one step of iterative refinement.
inline Vec resolvent_solve(const Generator& G, double t, const Vec& x) {
  if (x.size() != G.dim) throw std::invalid_argument("resolvent_solve: dimension mismatch");
  Mat S = -G.A;
  S.diagonal().array() += t;
  Eigen::PartialPivLU<Mat> lu(S);
  Vec y = lu.solve(x);
  Vec r = x - S * y;
  y += lu.solve(r);
  r = x - S * y;
  if (!y.allFinite() || r.norm() > 1e-8 * std::max(1.0, x.norm()))
    throw std::domain_error("resolvent_solve: system singular or near-singular");
  return y;
}

inline std::vector<double> default_certification_grid() {
  std::vector<double> g;
  g.push_back(0.0);
  const int n = 96;
  for (int i = 0; i <= n; ++i) g.push_back(std::pow(10.0, -2.0 + 4.3 * i / n));  // 1e-2 .. ~2e2
  return g;
}

// Certifies (M, w): w from the spectral abscissa (clamped to <= 0), M as the
// smallest constant with ||e^{tA}|| <= M e^{wt} on the grid. Stores the result
// into the profile. Throws if the abscissa is positive beyond tolerance.
inline std::pair<double, double> certify_growth(Generator& G,
                                                const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("certify_growth: empty grid");
  Eigen::ComplexEigenSolver<Mat> es(G.A, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("certify_growth: eigensolver failed");
  double absc = es.eigenvalues().real().maxCoeff();
  if (absc > 1e-9 * std::max(1.0, G.norm_A))
    throw std::invalid_argument("certify_growth: not a bounded-semigroup generator (abscissa > 0)");
  G.abscissa = absc;
  double omega = std::min(absc, 0.0);
  double M = 1.0;
  for (double t : grid) {
    if (t < 0.0) throw std::invalid_argument("certify_growth: negative grid point");
    double n = t == 0.0 ? 1.0 : opnorm2(expm_matrix(G, t));
    // log space: e^{-wt} alone can overflow while the product stays moderate.
    // Norms in the denormal range carry too few bits to divide out reliably
    // and cannot raise M anyway.
    if (n > 1e-300) M = std::max(M, std::exp(std::log(n) - omega * t));
  }
  G.growth_M = M;
  G.growth_omega = omega;
  return {M, omega};
}

// Installs the algebraic profile ||T(t)|| <= C / t^delta derived from the
// exponential one; requires w < 0.
inline void set_decay_profile(Generator& G, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("set_decay_profile: delta must be positive");
  if (!(G.growth_omega < 0.0))
    throw std::invalid_argument("set_decay_profile: requires a certified w < 0");
  // max_t M e^{wt} t^delta attained at t = delta / (-w)
  G.decay_delta = delta;
  G.decay_C = G.growth_M * std::pow(delta / -G.growth_omega, delta) * std::exp(-delta);
}

inline Generator make_generator_from(Mat A, std::vector<double> grid = default_certification_grid()) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw std::invalid_argument("make_generator: matrix must be square and nonempty");
  Generator G;
  G.A = std::move(A);
  G.dim = static_cast<int>(G.A.rows());
  G.norm_A = opnorm2(G.A);
  certify_growth(G, grid);
  if (G.dim == 1) {
    G.injective = std::abs(G.A(0, 0)) > 0.0;
  } else {
    Eigen::JacobiSVD<Mat> svd(G.A);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(G.dim - 1);
    G.injective = smax > 0.0 && smin > 1e-10 * smax;
  }
  if (G.growth_omega < 0.0) set_decay_profile(G, 1.0);
  return G;
}

template <typename Derived>
Generator make_generator(const Eigen::MatrixBase<Derived>& A,
                         std::vector<double> grid = default_certification_grid()) {
  return make_generator_from(A.template cast<Complex>().eval(), std::move(grid));
}

}  // namespace opcalc
