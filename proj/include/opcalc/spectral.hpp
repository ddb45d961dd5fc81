#pragma once

#include "opcalc/generator.hpp"
#include "opcalc/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

namespace opcalc {

struct SpectralData {
  Vec eigenvalues;      // sorted by (Re, Im)
  Mat right_vectors;    // columns follow the eigenvalue order
  Mat inverse_vectors;  // V^{-1}
  double condition_estimate = 1.0;
};

constexpr double kOracleConditionThreshold = 1e8;

// A = V diag(lambda) V^{-1} with deterministic eigenvalue ordering. Defective
// or ill-conditioned eigenbases raise OracleUnavailable; engine routes do not
// depend on this succeeding.
inline SpectralData spectral_decompose(const Generator& G) {
  Eigen::ComplexEigenSolver<Mat> es(G.A);
  if (es.info() != Eigen::Success) throw OracleUnavailable("eigensolver did not converge");
  std::vector<int> idx(G.dim);
  std::iota(idx.begin(), idx.end(), 0);
  const Vec& ev = es.eigenvalues();
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });
  SpectralData d;
  d.eigenvalues.resize(G.dim);
  d.right_vectors.resize(G.dim, G.dim);
  for (int i = 0; i < G.dim; ++i) {
    d.eigenvalues(i) = ev(idx[i]);
    d.right_vectors.col(i) = es.eigenvectors().col(idx[i]);
  }
  Eigen::JacobiSVD<Mat> svd(d.right_vectors);
  double smin = svd.singularValues()(G.dim - 1);
  double smax = svd.singularValues()(0);
  if (!(smin > 0.0)) throw OracleUnavailable("defective eigenbasis");
  d.condition_estimate = smax / smin;
  if (d.condition_estimate > kOracleConditionThreshold)
    throw OracleUnavailable("eigenvector condition above threshold");
  double resid = (G.A * d.right_vectors - d.right_vectors * d.eigenvalues.asDiagonal().toDenseMatrix()).norm();
  if (resid > 1e-10 * std::max(1.0, G.A.norm()) * d.condition_estimate)
    throw OracleUnavailable("eigendecomposition residual too large");
  d.inverse_vectors = d.right_vectors.partialPivLu().solve(Mat::Identity(G.dim, G.dim));
  return d;
}

inline std::optional<SpectralData> try_spectral_decompose(const Generator& G) {
  try {
    return spectral_decompose(G);
  } catch (const OracleUnavailable&) {
    return std::nullopt;
  }
}

// Ground-truth functional calculus f(A) x = V f(Lambda) V^{-1} x, used only
// for validation. f must be finite on the spectrum.
inline Vec oracle_apply(const Generator& G, const std::function<Complex(Complex)>& f,
                        const Vec& x) {
  if (x.size() != G.dim) throw std::invalid_argument("oracle_apply: dimension mismatch");
  SpectralData d = spectral_decompose(G);
  Vec w = d.inverse_vectors * x;
  for (int i = 0; i < G.dim; ++i) {
    Complex fv = f(d.eigenvalues(i));
    if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
      throw std::domain_error("oracle_apply: function undefined at an eigenvalue");
    w(i) *= fv;
  }
  return d.right_vectors * w;
}

inline Vec oracle_apply(const Generator& G, const SpectralData& d,
                        const std::function<Complex(Complex)>& f, const Vec& x) {
  Vec w = d.inverse_vectors * x;
  for (int i = 0; i < static_cast<int>(w.size()); ++i) {
    Complex fv = f(d.eigenvalues(i));
    if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()))
      throw std::domain_error("oracle_apply: function undefined at an eigenvalue");
    w(i) *= fv;
  }
  return d.right_vectors * w;
}

}  // namespace opcalc
