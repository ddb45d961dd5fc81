#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>

namespace opcalc {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;

// Thrown when the spectral oracle cannot be formed (defective or ill-conditioned
// eigenbasis). Engine routes keep working; only oracle comparisons are skipped.
struct OracleUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a truncation bound does not exist (profile x density not
// integrable at infinity).
struct DivergentIntegral : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by the panel core when the panel budget is exhausted before the
// tolerance is met. Carries partial diagnostics so callers can surface a
// non-convergent verdict instead of a silent wrong answer.
struct NonConvergentIntegral : std::runtime_error {
  double partial_error;
  int panels;
  NonConvergentIntegral(const std::string& what, double err, int n)
      : std::runtime_error(what), partial_error(err), panels(n) {}
};

// exp(z) - 1 without cancellation for small |z|.
inline Complex cexpm1(Complex z) {
  if (std::abs(z) > 0.5) return std::exp(z) - 1.0;
  Complex term = z, sum = z;
  for (int k = 2; k <= 24; ++k) {
    term *= z / static_cast<double>(k);
    sum += term;
    if (std::abs(term) < 1e-20 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Scalar token: plain real when the imaginary part is exactly zero, otherwise
// "a+bi" with both parts at full precision.
inline std::string format_scalar(Complex v) {
  if (v.imag() == 0.0) return format_real(v.real());
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
  return buf;
}

inline std::uint64_t double_key(double v) {
  std::uint64_t k;
  static_assert(sizeof(k) == sizeof(v));
  std::memcpy(&k, &v, sizeof(k));
  return k;
}

}  // namespace opcalc
