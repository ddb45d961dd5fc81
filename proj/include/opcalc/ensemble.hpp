#pragma once

#include "opcalc/generator.hpp"

#include <cstdint>
#include <random>

namespace opcalc {

// Seeded draws used by the randomized suites. Distributions are implemented
// directly on top of mt19937_64 output (library distributions are not
// bit-stable across standard library implementations).

inline double rng_u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

inline double rng_uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * rng_u01(rng);
}

inline double rng_gauss(std::mt19937_64& rng) {
  // Box-Muller, one value per call for reproducibility
  double u1 = rng_u01(rng), u2 = rng_u01(rng);
  while (u1 <= 1e-300) u1 = rng_u01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Vec random_unit_vector(std::mt19937_64& rng, int dim) {
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x(i) = Complex(rng_gauss(rng), rng_gauss(rng));
  double n = x.norm();
  if (n == 0.0) return random_unit_vector(rng, dim);
  return x / n;
}

// Diagonalizable stable draw: eigenvalues with real part in [-3, -0.1] (half
// of them given imaginary parts in [-1.5, 1.5]), conjugated by a well
// conditioned random basis (condition <= 1e3 enforced by redraw).
inline Generator random_stable_generator(std::mt19937_64& rng, int dim) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vec lambda(dim);
    for (int i = 0; i < dim; ++i) {
      double re = -rng_uniform(rng, 0.1, 3.0);
      double im = (i % 2 == 0) ? 0.0 : rng_uniform(rng, -1.5, 1.5);
      lambda(i) = Complex(re, im);
    }
    Mat V = Mat::Identity(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        V(i, j) += 0.35 * Complex(rng_gauss(rng), rng_gauss(rng));
    Eigen::JacobiSVD<Mat> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double cond = svd.singularValues()(0) / svd.singularValues()(dim - 1);
    if (!(cond <= 1e3)) continue;
    Mat A = V * lambda.asDiagonal() * V.inverse();
    return make_generator(A);
  }
  throw std::runtime_error("random_stable_generator: failed to draw a conditioned basis");
}

// Symmetric real contraction draw (M = 1 up to roundoff): Q Lambda Q^T with
// eigenvalues in [-2.5, -0.5].
inline Generator random_symmetric_contraction(std::mt19937_64& rng, int dim) {
  Eigen::MatrixXd B(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) B(i, j) = rng_gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd lambda(dim);
  for (int i = 0; i < dim; ++i) lambda(i) = -rng_uniform(rng, 0.5, 2.5);
  Eigen::MatrixXd A = Q * lambda.asDiagonal() * Q.transpose();
  A = 0.5 * (A + A.transpose().eval());
  return make_generator(A);
}

// Bounded, merely stable draw (w = 0): either a zero eigenvalue block or a
// rotation block, padded with a stable part. Used by the divergence suite.
inline Generator random_omega_zero_generator(std::mt19937_64& rng, int dim) {
  Mat A = Mat::Zero(dim, dim);
  bool rotation = dim >= 2 && (rng() & 1u);
  int start;
  if (rotation) {
    double w = rng_uniform(rng, 0.5, 2.0);
    A(0, 1) = Complex(w, 0.0);
    A(1, 0) = Complex(-w, 0.0);
    start = 2;
  } else {
    A(0, 0) = 0.0;
    start = 1;
  }
  for (int i = start; i < dim; ++i) A(i, i) = Complex(-rng_uniform(rng, 0.2, 2.0), 0.0);
  return make_generator(A);
}

}  // namespace opcalc
