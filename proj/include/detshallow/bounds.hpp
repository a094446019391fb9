#pragma once

#include <cmath>
#include <vector>

#include "detshallow/numeric.hpp"

namespace detshallow {

// Technical inequalities used by the truncation-error analysis of the shift.

struct InequalityCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = INFINITY;  // min over the grid of log(rhs) - log(lhs)
};

// (l+p-1)!/p! <= e (p/e)^l ((p+l)/p)^(p+l), compared in the log domain.
inline double factorial_ratio_margin(unsigned long l, unsigned long p, mpfr_prec_t prec = 192) {
  BigFloat lhs(prec), tmp(prec);
  mpfr_lngamma(lhs.raw(), BigFloat(static_cast<long>(l + p), prec).raw(), MPFR_RNDN);
  mpfr_lngamma(tmp.raw(), BigFloat(static_cast<long>(p + 1), prec).raw(), MPFR_RNDN);
  lhs -= tmp;
  BigFloat lp = log(BigFloat(static_cast<long>(p), prec));
  BigFloat lpl = log(BigFloat(static_cast<long>(p + l), prec));
  BigFloat one(1L, prec);
  BigFloat rhs = one + BigFloat(static_cast<long>(l), prec) * (lp - one) +
                 BigFloat(static_cast<long>(p + l), prec) * (lpl - lp);
  return (rhs - lhs).to_double();
}

inline InequalityCheck check_factorial_ratio(unsigned long max_l, unsigned long max_p) {
  InequalityCheck c;
  for (unsigned long l = 1; l <= max_l; ++l)
    for (unsigned long p = 1; p <= max_p; ++p) {
      double m = factorial_ratio_margin(l, p);
      ++c.checked;
      if (m < 0) ++c.violations;
      c.worst_margin = std::min(c.worst_margin, m);
    }
  return c;
}

// sum_{k>=m} beta^(-k) k^l <= m^l beta^(-m) / (1 - beta^(-1) e^(l/m)) for
// m > l / ln(beta). The left side is summed until terms fall below 2^-prec of
// the total; the remainder is closed with a geometric tail at that far index.
inline InequalityCheck check_power_tail(double beta, unsigned long l, unsigned long m_max, mpfr_prec_t prec = 192) {
  InequalityCheck c;
  double lnb = std::log(beta);
  unsigned long m_min = static_cast<unsigned long>(std::ceil(l / lnb)) + 1;
  if (m_min > m_max) return c;
  BigFloat b(beta, prec), L(static_cast<long>(l), prec), one(1L, prec);
  BigFloat binv = one / b;
  auto term = [&](unsigned long k) {
    BigFloat kf(static_cast<long>(k), prec);
    return exp(L * log(kf) - kf * log(b));
  };
  // a_k for k in [m_min, K]
  std::vector<BigFloat> a;
  BigFloat total(prec);
  unsigned long k = m_min;
  for (;; ++k) {
    BigFloat t = term(k);
    a.push_back(t);
    total += t;
    if (k > 2 * m_max && k > 4 * l / lnb) {
      BigFloat rel = t / total;
      if (rel.to_double() < std::ldexp(1.0, -static_cast<int>(prec) + 8)) break;
    }
  }
  unsigned long K = k;
  BigFloat ratio = binv * exp(L / BigFloat(static_cast<long>(K + 1), prec));
  BigFloat suffix = term(K + 1) / (one - ratio);
  for (unsigned long j = K + 1; j-- > m_min;) {
    suffix += a[j - m_min];
    if (j > m_max) continue;
    BigFloat mf(static_cast<long>(j), prec);
    BigFloat rhs = term(j) / (one - binv * exp(L / mf));
    ++c.checked;
    double margin = (log(rhs) - log(suffix)).to_double();
    if (margin < 0) ++c.violations;
    c.worst_margin = std::min(c.worst_margin, margin);
  }
  return c;
}

}  // namespace detshallow
