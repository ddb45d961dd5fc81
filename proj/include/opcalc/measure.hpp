#pragma once

#include "opcalc/types.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace opcalc {

enum class SignInfo { positive, signed_, complex_ };

// How the density behaves as t -> 0+; drives the choice of head treatment in
// the quadrature layer.
enum class HeadKind {
  none,    // density bounded by c * t^p0 with p0 >= 0
  power,   // density ~ c * t^p0 with -1 < p0 < 0
  loginv,  // density ~ c / (t log^2(1/t)); needs head_density_u
};

struct Atom {
  double location = 0.0;  // >= 0
  Complex weight{1.0, 0.0};
};

// Declared endpoint behavior of a density. The quadrature layer trusts these
// declarations (they come from closed-form analysis of each catalog symbol)
// and the test suite verifies them by sampling.
struct DensityInfo {
  double p0 = 0.0;        // density ~ t^p0 near 0
  double p_inf = 0.0;     // |density(t)| <= c_inf * t^p_inf * exp(-kappa_inf t) ...
  double kappa_inf = 0.0;
  double c_inf = 1.0;
  double t_ref = 0.0;     // ... valid for t >= t_ref
  HeadKind head = HeadKind::none;
};

struct MeasureRepr {
  std::vector<Atom> atoms;
  std::function<Complex(double)> density;  // null for purely atomic measures
  DensityInfo info;
  SignInfo sign = SignInfo::positive;

  // For HeadKind::loginv only: the transformed head integrand
  //   head_density_u(u) = density(t(u)) * t'(u),  t(u) = exp(-1/u),
  // computed in log space by the symbol author so the raw density is never
  // materialized where it would overflow. Covers t in (0, 1/e], u in (0, 1].
  std::function<Complex(double)> head_density_u;
};

inline MeasureRepr atom_measure(std::vector<Atom> atoms) {
  MeasureRepr m;
  m.atoms = std::move(atoms);
  for (const Atom& a : m.atoms)
    if (a.location < 0.0) throw std::invalid_argument("atom location < 0");
  return m;
}

inline MeasureRepr density_measure(std::function<Complex(double)> f, DensityInfo info,
                                   SignInfo sign = SignInfo::positive) {
  MeasureRepr m;
  m.density = std::move(f);
  m.info = info;
  m.sign = sign;
  return m;
}

}  // namespace opcalc
