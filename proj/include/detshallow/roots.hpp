#pragma once

#include <cmath>
#include <vector>

#include "detshallow/numeric.hpp"

namespace detshallow {

// All roots of sum_i c_i z^i (trailing zero coefficients dropped) by
// Aberth-Ehrlich iteration in big-float arithmetic.
inline std::vector<FloatComplex> polynomial_roots(std::vector<ExactComplex> coeffs, mpfr_prec_t prec = 256,
                                                  int max_iter = 500) {
  while (!coeffs.empty() && is_zero(coeffs.back())) coeffs.pop_back();
  if (coeffs.size() <= 1) return {};
  std::size_t deg = coeffs.size() - 1;
  std::vector<FloatComplex> c;
  for (const auto& x : coeffs) c.push_back(to_float(x, prec));
  FloatComplex lead_inv = c.back().inverse();
  for (auto& x : c) x *= lead_inv;  // monic

  // Start on a circle of Cauchy-bound radius, rotated off the axes.
  BigFloat radius(1L, prec);
  for (std::size_t i = 0; i < deg; ++i) {
    BigFloat a = abs(c[i]) + BigFloat(1L, prec);
    if (a > radius) radius = a;
  }
  std::vector<FloatComplex> z(deg);
  BigFloat two_pi = BigFloat::pi(prec) * BigFloat(2L, prec);
  for (std::size_t k = 0; k < deg; ++k) {
    BigFloat ang = two_pi * BigFloat(static_cast<long>(k), prec) / BigFloat(static_cast<long>(deg), prec) +
                   BigFloat(0.4, prec);
    z[k] = FloatComplex(radius * cos(ang) / BigFloat(2L, prec), radius * sin(ang) / BigFloat(2L, prec));
  }
  BigFloat tol(1L, prec);
  mpfr_mul_2si(tol.raw(), tol.raw(), -static_cast<long>(prec) + 16, MPFR_RNDN);
  FloatComplex zero = ScalarOps<FloatComplex>::zero(c[0]);
  for (int it = 0; it < max_iter; ++it) {
    BigFloat worst(prec);
    for (std::size_t k = 0; k < deg; ++k) {
      FloatComplex p = c[deg], dp = zero;
      for (std::size_t i = deg; i-- > 0;) {
        dp = dp * z[k] + p;
        p = p * z[k] + c[i];
      }
      if (p.re.is_zero() && p.im.is_zero()) continue;
      FloatComplex ratio = p / dp;
      FloatComplex s = zero;
      for (std::size_t j = 0; j < deg; ++j)
        if (j != k) s += (z[k] - z[j]).inverse();
      FloatComplex w = ratio / (ScalarOps<FloatComplex>::one(zero) - ratio * s);
      z[k] -= w;
      BigFloat aw = abs(w) / (abs(z[k]) + BigFloat(1L, prec));
      if (aw > worst) worst = aw;
    }
    if (worst < tol) break;
  }
  return z;
}

}  // namespace detshallow
