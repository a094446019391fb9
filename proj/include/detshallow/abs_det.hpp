#pragma once

#include <cmath>
#include <vector>

#include "detshallow/matrix.hpp"

namespace detshallow {

template <class T>
using Vector = std::vector<T>;

namespace detail {

template <class T>
Matrix<T> identity_like(std::size_t n, const T& like) {
  Matrix<T> m(n, ScalarOps<T>::zero(like));
  for (std::size_t i = 0; i < n; ++i) m(i, i) = ScalarOps<T>::one(like);
  return m;
}

template <class T>
Matrix<T> add(const Matrix<T>& x, const Matrix<T>& y) {
  Matrix<T> m = x;
  for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] += y.a[i];
  return m;
}

template <class T>
Vector<T> apply(const Matrix<T>& m, const Vector<T>& v) {
  Vector<T> out(m.n, ScalarOps<T>::zero(v.front()));
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) out[i] += m(i, j) * v[j];
  return out;
}

}  // namespace detail

// x = sum_{i<k} alpha (I - alpha B)^i b. The geometric sum S_j = sum_{i<j} P^i
// is built along the bits of k with S_2j = S_j + P^j S_j and
// S_(j+1) = I + P S_j, so only O(log k) matrix products are needed.
template <class T>
Vector<T> gradient_descent_solve(const Matrix<T>& B, const Vector<T>& b, const T& alpha, std::uint64_t k) {
  if (B.n != b.size()) throw ArityError("matrix and vector sizes differ");
  if (B.n == 0 || k == 0) return Vector<T>(b.size(), b.empty() ? T{} : ScalarOps<T>::zero(b.front()));
  const T& like = b.front();
  Matrix<T> I = detail::identity_like(B.n, like);
  Matrix<T> P = I;
  for (std::size_t i = 0; i < P.a.size(); ++i) P.a[i] -= alpha * B.a[i];
  Matrix<T> S(B.n, ScalarOps<T>::zero(like));  // S_0 = 0
  Matrix<T> Pj = I;                             // P^j
  int top = 63;
  while (!((k >> top) & 1)) --top;
  for (int bit = top; bit >= 0; --bit) {
    S = detail::add(S, Pj * S);
    Pj = Pj * Pj;
    if ((k >> bit) & 1) {
      S = detail::add(I, P * S);
      Pj = Pj * P;
    }
  }
  Vector<T> x = detail::apply(S, b);
  for (auto& v : x) v *= alpha;
  return x;
}

// Plain iteration x <- x + alpha (b - B x), for cross-checking.
template <class T>
Vector<T> gradient_descent_iterate(const Matrix<T>& B, const Vector<T>& b, const T& alpha, std::uint64_t k) {
  Vector<T> x(b.size(), ScalarOps<T>::zero(b.front()));
  for (std::uint64_t it = 0; it < k; ++it) {
    Vector<T> r = detail::apply(B, x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * (b[i] - r[i]);
  }
  return x;
}

// Iterations so that (1 - 1/kappa^2)^k <= eps / (2 n kappa^2).
inline std::uint64_t abs_det_iterations(std::size_t n, double epsilon, double kappa) {
  double k2 = kappa * kappa;
  return static_cast<std::uint64_t>(std::ceil(k2 * std::log(2.0 * static_cast<double>(n) * k2 / epsilon)));
}

struct AbsDetResult {
  FloatComplex estimate;       // |Det(A)| (real)
  std::vector<double> v;       // v_i ~ e_i^T (B^(i))^-1 e_i
  std::uint64_t iterations = 0;
  double alpha = 1.0;
  mpfr_prec_t precision = 0;
};

constexpr double kUnitLowerTolerance = 1e-6;

// |Det(A)| for A with sigma_max <= 1 and condition number <= kappa, through
// B = A^* A (so 0 < B <= I) and Det(B) = prod_i 1 / v_i. Step size 1 is
// admissible because B <= I.
inline AbsDetResult abs_det_approx(const ComplexMatrix& A, double epsilon, double kappa, mpfr_prec_t prec = 128) {
  if (!(epsilon > 0) || !(kappa >= 1)) throw ParameterError("need epsilon > 0 and kappa >= 1");
  std::size_t n = A.n();
  if (n == 0) throw ParameterError("empty matrix");
  ExactMatrix Bx = A.entries.adjoint() * A.entries;
  FloatMatrix B = to_float(Bx, prec);
  AbsDetResult res;
  res.precision = prec;
  res.iterations = abs_det_iterations(n, epsilon, kappa);
  FloatComplex one = ScalarOps<FloatComplex>::one(B.a.front());
  // Per-index solves are independent; results are combined in index order.
  BigFloat log_det_b(prec);
  for (std::size_t i = 1; i <= n; ++i) {
    FloatMatrix Bi = B.leading(i);
    Vector<FloatComplex> e(i, ScalarOps<FloatComplex>::zero(one));
    e[i - 1] = one;
    auto x = gradient_descent_solve(Bi, e, one, res.iterations);
    BigFloat vi = x[i - 1].re;
    if (vi.to_double() < 1.0 - kUnitLowerTolerance)
      throw PreconditionError("v_" + std::to_string(i) + " = " + vi.to_string(8) +
                              " < 1: the matrix is not normalised to sigma_max <= 1");
    // (B^(i))^-1 has norm at most kappa^2; larger values mean the iteration diverged.
    if (vi.to_double() > kappa * kappa * (1.0 + kUnitLowerTolerance))
      throw PreconditionError("v_" + std::to_string(i) + " = " + vi.to_string(8) +
                              " exceeds kappa^2: sigma_max > 1 or the condition bound is violated");
    res.v.push_back(vi.to_double());
    log_det_b -= log(vi);
  }
  BigFloat half(1L, prec);
  half /= BigFloat(2L, prec);
  res.estimate = FloatComplex(exp(log_det_b * half), BigFloat(prec));
  return res;
}

// Det(A) = prod_i 1 / (e_i^T (A^(i))^-1 e_i) for positive definite A, exactly.
inline ExactComplex telescoping_det(const ExactMatrix& A) {
  ExactComplex prod = exact(1);
  for (std::size_t i = 1; i <= A.n; ++i) {
    ExactMatrix inv = exact_inverse(A.leading(i));
    prod *= inv(i - 1, i - 1).inverse();
  }
  return prod;
}

}  // namespace detshallow
