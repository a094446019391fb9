#pragma once

#include <vector>

#include "detshallow/circuit.hpp"
#include "detshallow/coeff_extract.hpp"

namespace detshallow {

enum class SeriesKind { OfG, OfF };
// Derivative: values[l] = h^(l)(base).  Coefficient: values[l] = [z^l] h(base + z).
enum class Convention { Derivative, Coefficient };

template <class T>
struct DerivativeSeries {
  std::vector<T> values;
  ExactComplex base_point = exact(0);
  SeriesKind kind = SeriesKind::OfG;
  Convention convention = Convention::Derivative;
};

namespace detail {

inline mpq_class inv_factorial(std::size_t l) { return mpq_class(1) / mpq_class(factorial(l)); }

template <class T>
T scale_rational(const T& x, const mpq_class& q) {
  return x * ScalarOps<T>::from_exact(exact(q), x);
}

template <class T>
std::vector<T> convert(const std::vector<T>& v, Convention from, Convention to) {
  if (from == to) return v;
  std::vector<T> out(v.size());
  for (std::size_t l = 0; l < v.size(); ++l)
    out[l] = from == Convention::Derivative ? scale_rational(v[l], inv_factorial(l))
                                            : scale_rational(v[l], mpq_class(factorial(l)));
  return out;
}

// Truncated product of power series (orders 0..k).
template <class T>
std::vector<T> series_mul(const std::vector<T>& a, const std::vector<T>& b, std::size_t k) {
  std::vector<T> out(k + 1, ScalarOps<T>::zero(a.front()));
  for (std::size_t i = 0; i <= k && i < a.size(); ++i)
    for (std::size_t j = 0; i + j <= k && j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

template <class T>
void require_unit_constant(const T& g0);

template <>
inline void require_unit_constant(const ExactComplex& g0) {
  if (!is_one(g0)) throw NormalizationError("g(0) must equal 1");
}
template <>
inline void require_unit_constant(const FloatComplex& g0) {
  BigFloat tol(1L, g0.re.precision());
  mpfr_mul_2si(tol.raw(), tol.raw(), -static_cast<long>(g0.re.precision()) / 2, MPFR_RNDN);
  FloatComplex d = g0 - ScalarOps<FloatComplex>::one(g0);
  if (abs(d) > tol) throw NormalizationError("g(0) must equal 1");
}
template <>
inline void require_unit_constant(const ModComplex& g0) {
  if (!(g0 == ScalarOps<ModComplex>::one(g0))) throw NormalizationError("g(0) must equal 1");
}

}  // namespace detail

template <class T>
DerivativeSeries<T> to_convention(const DerivativeSeries<T>& s, Convention c) {
  DerivativeSeries<T> out = s;
  out.values = detail::convert(s.values, s.convention, c);
  out.convention = c;
  return out;
}

// Taylor data of f = log g at 0 up to order k, by truncated composition
// h(g(z) - 1) with h(u) = sum_{i=1..k} (-1)^(i+1) u^i / i. f(0) = 0.
template <class T>
DerivativeSeries<T> log_derivatives(const DerivativeSeries<T>& g, long k) {
  if (k < 0) throw ParameterError("order must be non-negative");
  std::size_t kk = static_cast<std::size_t>(k);
  if (g.values.size() < kk + 1) throw ParameterError("series too short for the requested order");
  detail::require_unit_constant(g.values[0]);
  auto a = detail::convert(g.values, g.convention, Convention::Coefficient);
  a.resize(kk + 1);
  const T& like = a[0];
  T zero = ScalarOps<T>::zero(like);
  std::vector<T> u = a;
  u[0] = zero;
  std::vector<T> h(kk + 1, zero);
  if (kk >= 1) {
    auto coef = [&](std::size_t i) {
      return ScalarOps<T>::from_exact(exact(mpq_class(i % 2 ? 1 : -1, static_cast<long>(i))), like);
    };
    h[0] = coef(kk);
    for (std::size_t i = kk - 1; i >= 1; --i) {
      h = detail::series_mul(u, h, kk);
      h[0] += coef(i);
    }
    h = detail::series_mul(u, h, kk);
  }
  h[0] = zero;
  DerivativeSeries<T> f;
  f.values = detail::convert(h, Convention::Coefficient, g.convention);
  f.base_point = g.base_point;
  f.kind = SeriesKind::OfF;
  f.convention = g.convention;
  return f;
}

// Independent route: l f_l = l a_l - sum_{j<l} j f_j a_(l-j) (from f' g = g').
template <class T>
std::vector<T> log_coefficients_recurrence(const std::vector<T>& a, std::size_t k) {
  detail::require_unit_constant(a[0]);
  std::vector<T> f(k + 1, ScalarOps<T>::zero(a[0]));
  for (std::size_t l = 1; l <= k; ++l) {
    T acc = ScalarOps<T>::zero(a[0]);
    for (std::size_t j = 1; j < l; ++j) acc += detail::scale_rational(f[j] * a[l - j], mpq_class(static_cast<long>(j)));
    f[l] = a[l] - detail::scale_rational(acc, mpq_class(1, static_cast<long>(l)));
  }
  return f;
}

// Coefficients of exp(f) up to order k, with f(0) = 0.
template <class T>
std::vector<T> exp_coefficients(const std::vector<T>& f, std::size_t k) {
  std::vector<T> b(k + 1, ScalarOps<T>::zero(f[0]));
  b[0] = ScalarOps<T>::one(f[0]);
  for (std::size_t l = 1; l <= k; ++l) {
    T acc = ScalarOps<T>::zero(f[0]);
    for (std::size_t j = 1; j <= l; ++j) acc += detail::scale_rational(f[j] * b[l - j], mpq_class(static_cast<long>(j)));
    b[l] = detail::scale_rational(acc, mpq_class(1, static_cast<long>(l)));
  }
  return b;
}

// ---------------------------------------------------------------------------
// Circuit path. Variables 0..k hold the g-series (values[0] is unused since
// g(0) = 1); variable k+1 is the auxiliary z, eliminated by extraction.

namespace detail {

inline Circuit composed_log_polynomial(std::size_t k, Convention conv) {
  CircuitBuilder b(k + 2);
  VarIndex zv = static_cast<VarIndex>(k + 1);
  GateId z = b.input(zv);
  std::vector<GateId> terms;
  GateId zp = b.one();
  for (std::size_t i = 1; i <= k; ++i) {
    zp = b.mul(zp, z);
    GateId x = b.input(static_cast<VarIndex>(i));
    if (conv == Convention::Derivative) x = b.scale(exact(inv_factorial(i)), x);
    terms.push_back(b.mul(x, zp));
  }
  GateId u = b.sum(terms);
  auto coef = [&](std::size_t i) { return b.constant(exact(mpq_class(i % 2 ? 1 : -1, static_cast<long>(i)))); };
  GateId h = coef(k);
  for (std::size_t i = k - 1; i >= 1; --i) h = b.add(coef(i), b.mul(u, h));
  return b.finish(b.mul(u, h));
}

}  // namespace detail

// Circuit with inputs g^(0)(0)..g^(k)(0) computing f^(k)(0) (or the
// coefficient-convention analogue).
inline Circuit log_derivative_circuit(long k, Convention conv = Convention::Derivative) {
  if (k < 0) throw ParameterError("order must be non-negative");
  std::size_t kk = static_cast<std::size_t>(k);
  if (kk == 0) {
    CircuitBuilder b(1);
    return b.finish(b.zero());
  }
  Circuit poly = detail::composed_log_polynomial(kk, conv);
  Circuit coeff = extract_coefficient(poly, static_cast<VarIndex>(kk + 1), k);
  Circuit out = coeff;
  if (conv == Convention::Derivative) {
    CircuitBuilder b = CircuitBuilder::like(coeff);
    GateId g = b.import(coeff);
    out = b.finish(b.scale(exact(mpq_class(factorial(kk))), g));
  }
  // z is extracted away, so the remaining free variables are the g-inputs.
  if (out.free_degree() > kk) throw Error("log-derivative circuit exceeds its degree bound");
  return out;
}

// Coefficient-convention outputs f_0..f_k over one shared DAG (f_0 = 0).
inline MultiCircuit log_coefficient_circuits(long k) {
  if (k < 0) throw ParameterError("order must be non-negative");
  std::size_t kk = static_cast<std::size_t>(k);
  if (kk == 0) {
    CircuitBuilder b(1);
    return b.finish_multi({b.zero()});
  }
  Circuit poly = detail::composed_log_polynomial(kk, Convention::Coefficient);
  MultiCircuit mc = extract_coefficients_batch(poly, static_cast<VarIndex>(kk + 1), k);
  CircuitBuilder b = CircuitBuilder::like(*mc.store);
  std::vector<GateId> outs;
  outs.push_back(b.zero());
  for (std::size_t l = 1; l <= kk; ++l) outs.push_back(b.import(mc.view(l)));
  return b.finish_multi(outs);
}

}  // namespace detshallow
