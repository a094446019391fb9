#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "detshallow/circuit.hpp"
#include "detshallow/log_transform.hpp"

namespace detshallow {

enum class ScheduleKind { Hermitian, Hurwitz, Custom };

struct CacSchedule {
  ScheduleKind kind = ScheduleKind::Custom;
  mpq_class delta = 0;
  double theta = 0.4;
  std::vector<ExactComplex> points;  // s_0 .. s_t
  std::vector<ExactComplex> steps;   // steps[i-1] = s_i - s_(i-1)

  std::size_t t() const { return points.empty() ? 0 : points.size() - 1; }
  double beta() const { return std::exp(theta); }
};

inline CacSchedule schedule_from_points(std::vector<ExactComplex> points, double theta = 0.4) {
  if (points.empty() || !is_zero(points.front())) throw ParameterError("a schedule starts at 0");
  CacSchedule s;
  s.theta = theta;
  s.points = std::move(points);
  for (std::size_t i = 1; i < s.points.size(); ++i) s.steps.push_back(s.points[i] - s.points[i - 1]);
  return s;
}

inline double step_length(const ExactComplex& d) { return std::sqrt(mpq_class(d.norm()).get_d()); }

inline void require_valid_schedule(const CacSchedule& s);

// Cross from 0 to 1 + i/2 in steps of 1/4, then descend to 1 along Re = 1.
// The descent visits 1 + i/3 and then 1 + (i/2) 3^(-j), j >= 1, until the
// imaginary part is at most delta/5, and finishes at 1. The extra point
// 1 + i/3 splits the first descent step (1/3) so that step lengths never
// increase after the 1/4 cross-over steps.
inline CacSchedule hermitian_schedule(const mpq_class& delta) {
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  std::vector<ExactComplex> p{exact(0),
       ExactComplex(0, mpq_class(1, 4)),
       ExactComplex(0, mpq_class(1, 2)),
       ExactComplex(mpq_class(1, 4), mpq_class(1, 2)),
       ExactComplex(mpq_class(1, 2), mpq_class(1, 2)),
       ExactComplex(mpq_class(3, 4), mpq_class(1, 2)),
       ExactComplex(1, mpq_class(1, 2)),
       ExactComplex(1, mpq_class(1, 3))};
  mpq_class limit = delta / 5;
  mpq_class im(1, 2);
  do {
    im /= 3;
    p.push_back(ExactComplex(1, im));
  } while (im > limit);
  p.push_back(exact(1));
  CacSchedule s = schedule_from_points(std::move(p));
  s.kind = ScheduleKind::Hermitian;
  s.delta = delta;
  require_valid_schedule(s);
  return s;
}

// 0, 1/6, 1/3, 1/2, 2/3, then 1/2 + (1/2)(1 - 3^(-(j-4))) for j >= 5 until the
// point reaches 1 - delta/5, then 1.
inline CacSchedule hurwitz_schedule(const mpq_class& delta) {
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  std::vector<ExactComplex> p{exact(0), exact(mpq_class(1, 6)), exact(mpq_class(1, 3)), exact(mpq_class(1, 2)),
                              exact(mpq_class(2, 3))};
  mpq_class gap(1, 2);  // 1 - s_j = (1/2) 3^(-(j-4)) for j >= 5
  mpq_class target = 1 - delta / 5;
  mpq_class s;
  do {
    gap /= 3;
    s = 1 - gap;
    p.push_back(exact(s));
  } while (s < target);
  p.push_back(exact(1));
  CacSchedule sch = schedule_from_points(std::move(p));
  sch.kind = ScheduleKind::Hurwitz;
  sch.delta = delta;
  require_valid_schedule(sch);
  return sch;
}

// ---------------------------------------------------------------------------
// Root-free geometry. Distance from s to the region where roots of the
// schedule's polynomial may lie:
//   Hermitian (g_A):  real z in [1/2, 1/(1+delta)] or [1/(1-delta), inf);
//   Hurwitz (g_-A):   Re z >= 1/2, |z-1/2| >= 1/2, |z-1| >= delta/(1+delta).

inline double hermitian_region_distance(std::complex<double> s, double delta) {
  auto seg = [&](double a, double b) {
    double x = std::clamp(s.real(), a, b);
    return std::abs(s - std::complex<double>(x, 0));
  };
  double d1 = seg(0.5, 1.0 / (1.0 + delta));
  double c = 1.0 / (1.0 - delta);
  double d2 = std::abs(s - std::complex<double>(std::max(s.real(), c), 0));
  return std::min(d1, d2);
}

// Valid for real s in [0, 1): the nearest admissible points are 1/2 + i/2 and
// the intersection of |z-1/2| = 1/2 with |z-1| = rho (and their conjugates).
inline double hurwitz_region_distance(std::complex<double> s, double delta) {
  double rho = delta / (1.0 + delta);
  std::complex<double> p1(0.5, 0.5);
  std::complex<double> p2(1.0 - rho * rho, rho * std::sqrt(1.0 - rho * rho));
  return std::min({std::abs(s - p1), std::abs(s - std::conj(p1)), std::abs(s - p2), std::abs(s - std::conj(p2))});
}

// Signed distance of a root from the root-free set (negative: violation).
//   Hermitian: D(0, 1/2) u D(1, rho);  Hurwitz: {Re z < 1/2} u D(1/2, 1/2) u D(1, rho).
inline double hermitian_root_margin(std::complex<double> z, double delta) {
  double rho = delta / (1.0 + delta);
  return std::min(std::abs(z) - 0.5, std::abs(z - 1.0) - rho);
}
inline double hurwitz_root_margin(std::complex<double> z, double delta) {
  double rho = delta / (1.0 + delta);
  return std::min({z.real() - 0.5, std::abs(z - 0.5) - 0.5, std::abs(z - 1.0) - rho});
}

// Certified root-distance / step ratio for each segment (index i: s_i -> s_(i+1)).
inline std::vector<double> certified_ratios(const CacSchedule& s) {
  std::vector<double> out;
  double delta = s.delta.get_d();
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    std::complex<double> p = to_cdouble(s.points[i]);
    double d = s.kind == ScheduleKind::Hurwitz ? hurwitz_region_distance(p, delta)
                                               : hermitian_region_distance(p, delta);
    out.push_back(d / step_length(s.steps[i]));
  }
  return out;
}

// Ratio against explicitly known roots.
inline std::vector<double> root_ratios(const CacSchedule& s, const std::vector<std::complex<double>>& roots) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    std::complex<double> p = to_cdouble(s.points[i]);
    double d = std::numeric_limits<double>::infinity();
    for (auto r : roots) d = std::min(d, std::abs(p - r));
    out.push_back(d / step_length(s.steps[i]));
  }
  return out;
}

// Steps never grow and every segment keeps its certified ratio >= e^theta.
inline std::vector<std::string> schedule_violations(const CacSchedule& s) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < s.steps.size(); ++i)
    if (s.steps[i].norm() > s.steps[i - 1].norm()) out.push_back("step " + std::to_string(i + 1) + " grows");
  if (s.kind != ScheduleKind::Custom) {
    auto r = certified_ratios(s);
    for (std::size_t i = 0; i < r.size(); ++i)
      if (r[i] < s.beta()) out.push_back("segment " + std::to_string(i + 1) + " ratio " + std::to_string(r[i]));
  }
  return out;
}

inline void require_valid_schedule(const CacSchedule& s) {
  auto v = schedule_violations(s);
  if (!v.empty()) throw Error("invalid schedule: " + v.front());
}

// ---------------------------------------------------------------------------
// Derivative budgets.

enum class BudgetMode { Strict, Practical };

struct CacBudget {
  std::vector<mpz_class> m;
  BudgetMode mode = BudgetMode::Strict;

  std::size_t t() const { return m.empty() ? 0 : m.size() - 1; }
  std::size_t at(std::size_t i) const {
    if (!m.at(i).fits_ulong_p()) throw BudgetError("derivative budget too large to run", i);
    return m[i].get_ui();
  }
};

constexpr std::size_t kPracticalFloor = 8;

// ceil(theta m / (2 ln m)) for m >= 2 (natural logarithm).
inline mpz_class budget_step(const mpz_class& m, double theta) {
  mpfr_prec_t prec = static_cast<mpfr_prec_t>(mpz_sizeinbase(m.get_mpz_t(), 2)) + 128;
  BigFloat mf(m, prec);
  BigFloat v = BigFloat(theta, prec) * mf / (BigFloat(2L, prec) * log(mf));
  BigFloat c = ceil(v);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), c.raw(), MPFR_RNDN);
  return out;
}

inline CacBudget budget(const mpz_class& m0, double theta, std::size_t t,
                        BudgetMode mode = BudgetMode::Strict) {
  if (!(theta > 0 && theta <= 1)) throw ParameterError("theta must lie in (0,1]");
  if (mode == BudgetMode::Strict && m0 < 11) throw ParameterError("strict budgets need m0 >= 11");
  if (m0 < 1) throw ParameterError("m0 must be positive");
  CacBudget b;
  b.mode = mode;
  b.m.push_back(m0);
  for (std::size_t i = 1; i <= t; ++i) {
    const mpz_class& prev = b.m.back();
    mpz_class next;
    if (mode == BudgetMode::Strict) {
      if (prev < 2) throw BudgetError("derivative budget exhausted before segment " + std::to_string(i), i);
      next = budget_step(prev, theta);
    } else {
      mpz_class floor = std::min(prev, mpz_class(static_cast<unsigned long>(kPracticalFloor)));
      next = prev < 2 ? prev : budget_step(prev, theta);
      if (next < floor) next = floor;
    }
    b.m.push_back(next);
  }
  return b;
}
inline CacBudget budget(long m0, double theta, std::size_t t, BudgetMode mode = BudgetMode::Strict) {
  return budget(mpz_class(m0), theta, t, mode);
}

// Smallest integer >= C L (C t (ln t + ln L))^t with L = ln(n / (eps theta)).
// C = 10 suffices for the shift's error bound; the pipeline's strict mode uses C = 40.
inline mpz_class strict_m0(std::size_t n, double epsilon, double theta, std::size_t t, long constant = 10) {
  const mpfr_prec_t prec = 256;
  BigFloat L = log(BigFloat(static_cast<long>(n), prec) / (BigFloat(epsilon, prec) * BigFloat(theta, prec)));
  if (L.sign() <= 0) throw ParameterError("n/(epsilon theta) must exceed 1");
  BigFloat c(constant, prec);
  BigFloat inner = t == 0 ? BigFloat(1L, prec) : BigFloat(prec);
  if (t > 0) {
    BigFloat lt = log(BigFloat(static_cast<long>(t), prec));
    BigFloat base = c * BigFloat(static_cast<long>(t), prec) * (lt + log(L));
    if (base.sign() <= 0) throw ParameterError("log log(n/(epsilon theta)) term must keep the base positive");
    inner = pow(base, BigFloat(static_cast<long>(t), prec));
  }
  BigFloat v = ceil(c * L * inner);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), v.raw(), MPFR_RNDN);
  return out;
}

// ---------------------------------------------------------------------------
// Taylor shifting.

template <class T>
struct CacState {
  std::size_t i = 0;
  std::vector<T> fhat;  // derivatives f^(0..m_i) at s_i
};

// fhat'^(l) = sum_{p=0}^{m_i - l} fhat^(p+l) / p! * delta^p,  0 <= l <= m_next.
template <class T>
CacState<T> taylor_shift(const CacState<T>& st, const T& delta, std::size_t m_next) {
  if (st.fhat.empty()) throw ParameterError("empty state");
  std::size_t m = st.fhat.size() - 1;
  if (m_next > m) throw BudgetError("next budget exceeds the current one", st.i + 1);
  std::vector<T> w(m + 1);  // delta^p / p!
  w[0] = ScalarOps<T>::one(delta);
  for (std::size_t p = 1; p <= m; ++p)
    w[p] = detail::scale_rational(T(w[p - 1] * delta), mpq_class(1, static_cast<long>(p)));
  CacState<T> out;
  out.i = st.i + 1;
  out.fhat.resize(m_next + 1);
  for (std::size_t l = 0; l <= m_next; ++l) {
    T acc = ScalarOps<T>::zero(delta);
    for (std::size_t p = 0; p + l <= m; ++p) acc += st.fhat[p + l] * w[p];
    out.fhat[l] = std::move(acc);
  }
  return out;
}

// Coefficient form of the same map: c'_l = sum_p C(p+l, l) delta^p c_(p+l).
template <class T>
std::vector<T> taylor_shift_coefficients(const std::vector<T>& c, const T& delta, std::size_t m_next) {
  std::size_t m = c.size() - 1;
  if (m_next > m) throw BudgetError("next budget exceeds the current one", 0);
  std::vector<T> pw(m + 1);
  pw[0] = ScalarOps<T>::one(delta);
  for (std::size_t p = 1; p <= m; ++p) pw[p] = pw[p - 1] * delta;
  std::vector<T> out(m_next + 1);
  for (std::size_t l = 0; l <= m_next; ++l) {
    T acc = ScalarOps<T>::zero(delta);
    for (std::size_t p = 0; p + l <= m; ++p)
      acc += detail::scale_rational(T(c[p + l] * pw[p]), mpq_class(binomial(p + l, l)));
    out[l] = std::move(acc);
  }
  return out;
}

template <class T>
T schedule_step(const CacSchedule& s, std::size_t i, const T& like) {
  return ScalarOps<T>::from_exact(s.steps.at(i), like);
}

// f-derivatives at 0 shifted along the schedule; returns the final state.
template <class T>
CacState<T> run_cac_state(const DerivativeSeries<T>& g, const CacSchedule& schedule, const CacBudget& b) {
  if (b.m.size() != schedule.points.size())
    throw ParameterError("schedule has " + std::to_string(schedule.t()) + " segments but the budget has " +
                         std::to_string(b.t()));
  std::size_t m0 = b.at(0);
  if (g.values.size() < m0 + 1) throw ParameterError("g-series shorter than m0 + 1");
  auto f = log_derivatives(to_convention(g, Convention::Derivative), static_cast<long>(m0));
  CacState<T> st{0, f.values};
  for (std::size_t i = 1; i <= schedule.t(); ++i)
    st = taylor_shift(st, schedule_step(schedule, i - 1, g.values[0]), b.at(i));
  return st;
}

// The log-estimate fhat_t^(0).
template <class T>
T run_cac(const DerivativeSeries<T>& g, const CacSchedule& schedule, const CacBudget& b) {
  return run_cac_state(g, schedule, b).fhat[0];
}

// ---------------------------------------------------------------------------
// Circuit form. Variables 0..m0 are f-coefficients at 0; variables
// m0+1 .. m0+t are the steps, pinned to the schedule's values.

struct CacCircuitLayout {
  std::size_t m0 = 0;
  std::size_t t = 0;
  VarIndex coeff_var(std::size_t l) const { return static_cast<VarIndex>(l); }
  VarIndex step_var(std::size_t i) const { return static_cast<VarIndex>(m0 + i); }  // i = 1..t
  std::size_t base_vars() const { return m0 + t + 1; }
};

namespace detail {

inline std::vector<GateId> powers_by_squaring(CircuitBuilder& b, GateId x, std::size_t max_p) {
  std::vector<GateId> pw(max_p + 1);
  pw[0] = b.one();
  if (max_p >= 1) pw[1] = x;
  for (std::size_t p = 2; p <= max_p; ++p) pw[p] = b.mul(pw[p / 2], pw[p - p / 2]);
  return pw;
}

}  // namespace detail

// Emits the shift chain into `b` starting from coefficient gates `c`.
inline GateId build_cac(CircuitBuilder& b, std::vector<GateId> c, const std::vector<GateId>& step_gates,
                        const CacBudget& budget) {
  for (std::size_t i = 1; i < budget.m.size(); ++i) {
    std::size_t m = c.size() - 1;
    std::size_t m_next = budget.at(i);
    if (m_next > m) throw BudgetError("next budget exceeds the current one", i);
    auto pw = detail::powers_by_squaring(b, step_gates.at(i - 1), m);
    std::vector<GateId> next(m_next + 1);
    for (std::size_t l = 0; l <= m_next; ++l) {
      std::vector<GateId> terms;
      for (std::size_t p = 0; p + l <= m; ++p)
        terms.push_back(b.scale(exact(mpq_class(binomial(p + l, l))), b.mul(pw[p], c[p + l])));
      next[l] = b.sum(terms);
    }
    c = std::move(next);
  }
  return c.at(0);
}

inline Circuit cac_circuit(const CacSchedule& schedule, const CacBudget& budget) {
  if (budget.m.size() != schedule.points.size()) throw ParameterError("schedule/budget length mismatch");
  CacCircuitLayout lay{budget.at(0), schedule.t()};
  CircuitBuilder b(lay.base_vars());
  std::vector<GateId> c, steps;
  for (std::size_t l = 0; l <= lay.m0; ++l) c.push_back(b.input(lay.coeff_var(l)));
  for (std::size_t i = 1; i <= lay.t; ++i) {
    b.pin(lay.step_var(i), schedule.steps[i - 1]);
    steps.push_back(b.input(lay.step_var(i)));
  }
  return b.finish(build_cac(b, c, steps, budget));
}

}  // namespace detshallow
