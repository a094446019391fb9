#pragma once

#include <vector>

#include "detshallow/circuit.hpp"
#include "detshallow/matrix.hpp"

namespace detshallow {

enum class SignMode { Plain, Negated };

// Direct: Berkowitz applied to (1-z)I + zA.
// CharPoly: Berkowitz applied to A alone, recombined as
//   g_A(z) = sum_j c_j (-z)^j (1-z)^(n-j)   (c_j: coefficients of det(xI - A)).
// Both compute the same polynomial; CharPoly keeps the matrix part homogeneous
// and free of z, which makes downstream extraction and depth reduction cheap.
enum class Construction { Direct, CharPoly };

// Variable layout: entry (i,j) of A is variable i*n + j; z is variable n*n;
// pinned constants follow.
struct InterpolationPolynomialSpec {
  std::size_t n = 0;
  SignMode sign_mode = SignMode::Plain;
  Construction construction = Construction::Direct;

  VarIndex entry_var(std::size_t i, std::size_t j) const { return static_cast<VarIndex>(i * n + j); }
  VarIndex z_var() const { return static_cast<VarIndex>(n * n); }
  std::size_t base_vars() const { return n * n + 1; }
};

// Coefficients p[0..r] of det(xI - M) = sum_j p[j] x^(r-j) for the matrix of
// gates `m`, by the Toeplitz-product recurrence p_r = T_r p_(r-1).
inline std::vector<GateId> berkowitz(CircuitBuilder& b, const std::vector<std::vector<GateId>>& m) {
  std::size_t n = m.size();
  std::vector<GateId> p{b.one()};
  for (std::size_t r = 1; r <= n; ++r) {
    std::size_t q = r - 1;  // size of the leading block A_(r-1)
    std::vector<GateId> tau{b.one(), b.neg(m[q][q])};
    // tau_(j+2) = -R A^j S
    std::vector<GateId> v(q);
    for (std::size_t i = 0; i < q; ++i) v[i] = m[i][q];
    for (std::size_t j = 0; j + 2 <= r; ++j) {
      std::vector<GateId> terms;
      for (std::size_t i = 0; i < q; ++i) terms.push_back(b.mul(m[q][i], v[i]));
      tau.push_back(b.neg(b.sum(terms)));
      if (j + 3 > r) break;
      std::vector<GateId> nv(q);
      for (std::size_t i = 0; i < q; ++i) {
        std::vector<GateId> t;
        for (std::size_t l = 0; l < q; ++l) t.push_back(b.mul(m[i][l], v[l]));
        nv[i] = b.sum(t);
      }
      v = std::move(nv);
    }
    std::vector<GateId> next(r + 1);
    for (std::size_t j = 0; j <= r; ++j) {
      std::vector<GateId> terms;
      for (std::size_t i = 0; i <= std::min(j, r - 1); ++i) terms.push_back(b.mul(tau[j - i], p[i]));
      next[j] = b.sum(terms);
    }
    p = std::move(next);
  }
  return p;
}

inline GateId build_interpolation_polynomial(CircuitBuilder& b, const InterpolationPolynomialSpec& spec) {
  std::size_t n = spec.n;
  GateId z = b.input(spec.z_var());
  GateId nz = b.neg(z);
  GateId one_minus_z = b.add(b.one(), nz);
  bool negated = spec.sign_mode == SignMode::Negated;
  if (spec.construction == Construction::Direct) {
    GateId zs = negated ? nz : z;
    std::vector<std::vector<GateId>> m(n, std::vector<GateId>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        GateId t = b.mul(zs, b.input(spec.entry_var(i, j)));
        m[i][j] = i == j ? b.add(one_minus_z, t) : t;
      }
    auto p = berkowitz(b, m);
    return n % 2 ? b.neg(p[n]) : p[n];
  }
  std::vector<std::vector<GateId>> m(n, std::vector<GateId>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = b.input(spec.entry_var(i, j));
  auto p = berkowitz(b, m);
  // g_A = sum_j c_j (-z)^j (1-z)^(n-j);  g_(-A) = sum_j c_j z^j (1-z)^(n-j).
  GateId u = negated ? z : nz;
  std::vector<GateId> upow{b.one()}, wpow{b.one()};
  for (std::size_t j = 1; j <= n; ++j) {
    upow.push_back(b.mul(upow.back(), u));
    wpow.push_back(b.mul(wpow.back(), one_minus_z));
  }
  std::vector<GateId> terms;
  for (std::size_t j = 0; j <= n; ++j) terms.push_back(b.mul(p[j], b.mul(upow[j], wpow[n - j])));
  return b.sum(terms);
}

inline Circuit samuelson_berkowitz_circuit(const InterpolationPolynomialSpec& spec) {
  if (spec.n == 0) throw ParameterError("empty matrix");
  CircuitBuilder b(spec.base_vars());
  return b.finish(build_interpolation_polynomial(b, spec));
}

// Assignment placing A's entries and z in their documented slots.
template <class T>
std::vector<T> interpolation_assignment(const Circuit& c, const InterpolationPolynomialSpec& spec,
                                        const Matrix<T>& a, const T& z) {
  std::vector<T> x(c.num_vars(), ScalarOps<T>::zero(z));
  for (std::size_t i = 0; i < spec.n; ++i)
    for (std::size_t j = 0; j < spec.n; ++j) x[spec.entry_var(i, j)] = a(i, j);
  x[spec.z_var()] = z;
  return x;
}

// k-th derivative of g_A at 0 by brute force: k! * sum over k x k principal
// submatrices B of Det(B - I).
inline ExactComplex derivative_oracle(const ExactMatrix& a, long k) {
  if (k < 0) throw ParameterError("negative derivative order");
  std::size_t n = a.n;
  if (static_cast<std::size_t>(k) > n) return exact(0);
  std::size_t kk = static_cast<std::size_t>(k);
  ExactComplex total = exact(0);
  std::vector<std::size_t> idx(kk);
  for (std::size_t i = 0; i < kk; ++i) idx[i] = i;
  for (;;) {
    ExactMatrix b = a.submatrix(idx);
    for (std::size_t i = 0; i < kk; ++i) b(i, i) -= exact(1);
    total += exact_det(b);
    // next combination
    std::size_t i = kk;
    while (i > 0 && idx[i - 1] == n - kk + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < kk; ++j) idx[j] = idx[j - 1] + 1;
  }
  return total.scaled(mpq_class(factorial(kk)));
}

// Roots z = 1/(1 - w) of g_A from the eigenvalues w of A; unit eigenvalues
// contribute no root.
inline std::vector<ExactComplex> root_locations(const std::vector<ExactComplex>& eigenvalues) {
  std::vector<ExactComplex> roots;
  for (const auto& w : eigenvalues) {
    if (is_one(w)) continue;
    roots.push_back((exact(1) - w).inverse());
  }
  return roots;
}

}  // namespace detshallow
