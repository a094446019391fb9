#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "detshallow/errors.hpp"
#include "detshallow/numeric.hpp"

namespace detshallow {

template <class T>
struct Matrix {
  std::size_t n = 0;
  std::vector<T> a;

  Matrix() = default;
  Matrix(std::size_t n_, const T& fill) : n(n_), a(n_ * n_, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  // Leading principal k x k block.
  Matrix leading(std::size_t k) const {
    Matrix m(k, a.empty() ? T{} : a.front());
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m(i, j) = (*this)(i, j);
    return m;
  }
  Matrix submatrix(const std::vector<std::size_t>& idx) const {
    Matrix m(idx.size(), a.empty() ? T{} : a.front());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) m(i, j) = (*this)(idx[i], idx[j]);
    return m;
  }
  Matrix adjoint() const {
    Matrix m = *this;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = (*this)(j, i).conj();
    return m;
  }
  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    Matrix m(x.n, ScalarOps<T>::zero(x.a.front()));
    for (std::size_t i = 0; i < x.n; ++i)
      for (std::size_t k = 0; k < x.n; ++k) {
        const T& xik = x(i, k);
        for (std::size_t j = 0; j < x.n; ++j) m(i, j) += xik * y(k, j);
      }
    return m;
  }
  friend bool operator==(const Matrix& x, const Matrix& y) { return x.n == y.n && x.a == y.a; }
};

using ExactMatrix = Matrix<ExactComplex>;
using FloatMatrix = Matrix<FloatComplex>;

inline ExactMatrix identity_matrix(std::size_t n) {
  ExactMatrix m(n, exact(0));
  for (std::size_t i = 0; i < n; ++i) m(i, i) = exact(1);
  return m;
}

inline FloatMatrix to_float(const ExactMatrix& m, mpfr_prec_t prec) {
  FloatMatrix f;
  f.n = m.n;
  f.a.reserve(m.a.size());
  for (const auto& x : m.a) f.a.push_back(to_float(x, prec));
  return f;
}

enum class MatrixClass { None, Hermitian, Hurwitz, Psd, General };

inline std::string class_tag(MatrixClass c) {
  switch (c) {
    case MatrixClass::Hermitian: return "H";
    case MatrixClass::Hurwitz: return "S";
    case MatrixClass::Psd: return "psd";
    case MatrixClass::General: return "G";
    default: return "none";
  }
}
inline MatrixClass parse_class_tag(const std::string& s) {
  if (s == "H") return MatrixClass::Hermitian;
  if (s == "S") return MatrixClass::Hurwitz;
  if (s == "psd") return MatrixClass::Psd;
  if (s == "G") return MatrixClass::General;
  if (s == "none") return MatrixClass::None;
  throw ParseError("unknown class tag '" + s + "'");
}

struct Certificate {
  MatrixClass cls = MatrixClass::None;
  mpq_class delta = 0;
  // Eigenvalues for H/S/psd; singular values for General.
  std::vector<ExactComplex> spectrum;
};

struct ComplexMatrix {
  ExactMatrix entries;
  Certificate certificate;

  std::size_t n() const { return entries.n; }
};

// ---------------------------------------------------------------------------
// Determinants.

// Fraction-free (Bareiss) elimination with pivot search; exact.
inline ExactComplex exact_det(const ExactMatrix& m, std::size_t oracle_limit = 64) {
  if (m.n > oracle_limit) throw PreconditionError("matrix dimension exceeds the exact oracle limit");
  std::size_t n = m.n;
  if (n == 0) return exact(1);
  ExactMatrix w = m;
  ExactComplex prev = exact(1);
  bool negate = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (is_zero(w(k, k))) {
      std::size_t p = k + 1;
      while (p < n && is_zero(w(p, k))) ++p;
      if (p == n) return exact(0);
      for (std::size_t j = 0; j < n; ++j) std::swap(w(k, j), w(p, j));
      negate = !negate;
    }
    ExactComplex inv_prev = prev.inverse();
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) w(i, j) = (w(k, k) * w(i, j) - w(i, k) * w(k, j)) * inv_prev;
      w(i, k) = exact(0);
    }
    prev = w(k, k);
  }
  ExactComplex d = w(n - 1, n - 1);
  return negate ? -d : d;
}
inline ExactComplex exact_det(const ComplexMatrix& m, std::size_t oracle_limit = 64) {
  return exact_det(m.entries, oracle_limit);
}

// LU with partial pivoting at four times the entries' precision.
inline FloatComplex float_det(const FloatMatrix& m) {
  std::size_t n = m.n;
  mpfr_prec_t prec = n ? 4 * m.a.front().re.precision() : 256;
  FloatMatrix w;
  w.n = n;
  for (const auto& x : m.a) w.a.push_back(FloatComplex(BigFloat(prec) + x.re, BigFloat(prec) + x.im));
  FloatComplex det(BigFloat(1L, prec), BigFloat(prec));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    BigFloat best = w(k, k).norm();
    for (std::size_t i = k + 1; i < n; ++i) {
      BigFloat v = w(i, k).norm();
      if (v > best) best = v, p = i;
    }
    if (best.is_zero()) return FloatComplex(BigFloat(prec), BigFloat(prec));
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(w(k, j), w(p, j));
      det = -det;
    }
    FloatComplex inv = w(k, k).inverse();
    for (std::size_t i = k + 1; i < n; ++i) {
      FloatComplex f = w(i, k) * inv;
      for (std::size_t j = k + 1; j < n; ++j) w(i, j) -= f * w(k, j);
    }
    det *= w(k, k);
  }
  return det;
}

// Exact inverse by Gauss-Jordan elimination.
inline ExactMatrix exact_inverse(const ExactMatrix& m) {
  std::size_t n = m.n;
  ExactMatrix w = m, inv = identity_matrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && is_zero(w(p, k))) ++p;
    if (p == n) throw PreconditionError("singular matrix");
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(w(k, j), w(p, j));
      std::swap(inv(k, j), inv(p, j));
    }
    ExactComplex piv = w(k, k).inverse();
    for (std::size_t j = 0; j < n; ++j) {
      w(k, j) *= piv;
      inv(k, j) *= piv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || is_zero(w(i, k))) continue;
      ExactComplex f = w(i, k);
      for (std::size_t j = 0; j < n; ++j) {
        w(i, j) -= f * w(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Generators with certified spectra.

namespace detail {

constexpr long kGridBits = 10;

inline mpq_class grid_uniform(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(0, 1L << kGridBits);
  mpq_class q(d(rng), 1L << kGridBits);
  q.canonicalize();
  return q;
}

// Product of n Householder reflections I - 2 v v^* / (v^* v) with small
// Gaussian-integer vectors v; exactly unitary.
inline ExactMatrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  ExactMatrix u = identity_matrix(n);
  std::uniform_int_distribution<long> d(-2, 2);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<ExactComplex> v(n);
    mpq_class vv = 0;
    while (vv == 0) {
      vv = 0;
      for (auto& x : v) {
        x = exact(d(rng), d(rng));
        vv += x.norm();
      }
    }
    // u <- u (I - 2 v v^* / vv)
    std::vector<ExactComplex> uv(n, exact(0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) uv[i] += u(i, j) * v[j];
    mpq_class s = mpq_class(2) / vv;
    for (std::size_t i = 0; i < n; ++i) {
      ExactComplex f = uv[i].scaled(s);
      for (std::size_t j = 0; j < n; ++j) u(i, j) -= f * v[j].conj();
    }
  }
  return u;
}

inline ExactMatrix conjugate_diag(const ExactMatrix& u, const std::vector<ExactComplex>& d, const ExactMatrix& v) {
  std::size_t n = u.n;
  ExactMatrix ud = u;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ud(i, j) *= d[j];
  return ud * v.adjoint();
}

}  // namespace detail

// A = U diag(w) U^* with w uniform on the grid in [delta,1] u [-1,-delta].
// `negatives` fixes how many eigenvalues are negative (random when absent).
inline ComplexMatrix generate_hermitian(std::size_t n, const mpq_class& delta, std::uint64_t seed,
                                        std::optional<std::size_t> negatives = std::nullopt) {
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  if (negatives && *negatives > n) throw ParameterError("more negative eigenvalues than the dimension");
  std::mt19937_64 rng(seed);
  std::vector<ExactComplex> w(n);
  std::vector<bool> neg(n, false);
  if (negatives) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < *negatives; ++i) neg[idx[i]] = true;
  } else {
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < n; ++i) neg[i] = coin(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    mpq_class mag = delta + (1 - delta) * detail::grid_uniform(rng);
    w[i] = exact(neg[i] ? mpq_class(-mag) : mag);
  }
  ExactMatrix u = detail::random_unitary(n, rng);
  ComplexMatrix m{detail::conjugate_diag(u, w, u), {MatrixClass::Hermitian, delta, w}};
  return m;
}

// Normal A = U diag(l) U^* with Re l < 0 and delta <= |l| <= 1.
inline ComplexMatrix generate_hurwitz(std::size_t n, const mpq_class& delta, std::uint64_t seed) {
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> re_d(-(1L << detail::kGridBits), -1);
  std::uniform_int_distribution<long> im_d(-(1L << detail::kGridBits), 1L << detail::kGridBits);
  mpq_class lo = delta * delta;
  std::vector<ExactComplex> l(n);
  for (auto& x : l) {
    for (;;) {
      ExactComplex c(mpq_class(re_d(rng), 1L << detail::kGridBits), mpq_class(im_d(rng), 1L << detail::kGridBits));
      c.re.canonicalize();
      c.im.canonicalize();
      mpq_class nn = c.norm();
      if (nn >= lo && nn <= 1) {
        x = c;
        break;
      }
    }
  }
  ExactMatrix u = detail::random_unitary(n, rng);
  return ComplexMatrix{detail::conjugate_diag(u, l, u), {MatrixClass::Hurwitz, delta, l}};
}

// Positive definite U diag(s) U^* with s in [delta, 1].
inline ComplexMatrix generate_psd(std::size_t n, const mpq_class& delta, std::uint64_t seed) {
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::vector<ExactComplex> s(n);
  for (auto& x : s) x = exact(mpq_class(delta + (1 - delta) * detail::grid_uniform(rng)));
  ExactMatrix u = detail::random_unitary(n, rng);
  return ComplexMatrix{detail::conjugate_diag(u, s, u), {MatrixClass::Psd, delta, s}};
}

// General U diag(s) V^* with singular values s in [delta, 1].
inline ComplexMatrix generate_general(std::size_t n, const mpq_class& delta, std::uint64_t seed) {
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::vector<ExactComplex> s(n);
  for (auto& x : s) x = exact(mpq_class(delta + (1 - delta) * detail::grid_uniform(rng)));
  ExactMatrix u = detail::random_unitary(n, rng);
  ExactMatrix v = detail::random_unitary(n, rng);
  return ComplexMatrix{detail::conjugate_diag(u, s, v), {MatrixClass::General, delta, s}};
}

inline ComplexMatrix generate(MatrixClass cls, std::size_t n, const mpq_class& delta, std::uint64_t seed) {
  switch (cls) {
    case MatrixClass::Hermitian: return generate_hermitian(n, delta, seed);
    case MatrixClass::Hurwitz: return generate_hurwitz(n, delta, seed);
    case MatrixClass::Psd: return generate_psd(n, delta, seed);
    case MatrixClass::General: return generate_general(n, delta, seed);
    default: throw ParameterError("no generator for class 'none'");
  }
}

inline bool is_hermitian(const ExactMatrix& m) { return m == m.adjoint(); }

// ---------------------------------------------------------------------------
// Matrix text file: optional "# class=H delta=3/10" and "# eig re im" lines,
// then n, then n rows of 2n tokens (Re, Im interleaved).

inline void write_matrix(std::ostream& os, const ComplexMatrix& m) {
  const auto& c = m.certificate;
  if (c.cls != MatrixClass::None) {
    os << "# class=" << class_tag(c.cls) << " delta=" << c.delta << "\n";
    for (const auto& w : c.spectrum) os << "# eig " << w.re << " " << w.im << "\n";
  }
  os << m.n() << "\n";
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t j = 0; j < m.n(); ++j) {
      if (j) os << " ";
      os << m.entries(i, j).re << " " << m.entries(i, j).im;
    }
    os << "\n";
  }
}

inline ComplexMatrix read_matrix(std::istream& is) {
  ComplexMatrix m;
  std::string line;
  std::vector<std::string> tokens;
  while (std::getline(is, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ls(line.substr(first + 1));
      std::string tok;
      while (ls >> tok) {
        if (tok.rfind("class=", 0) == 0) {
          m.certificate.cls = parse_class_tag(tok.substr(6));
        } else if (tok.rfind("delta=", 0) == 0) {
          m.certificate.delta = parse_rational(tok.substr(6));
        } else if (tok == "eig") {
          std::string re, im;
          if (!(ls >> re >> im)) throw ParseError("bad eig line");
          m.certificate.spectrum.emplace_back(parse_rational(re), parse_rational(im));
        }
      }
      continue;
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.empty()) throw ParseError("empty matrix file");
  long n = 0;
  try {
    n = std::stol(tokens[0]);
  } catch (const std::logic_error&) {
    throw ParseError("first token must be the dimension");
  }
  if (n <= 0) throw ParseError("dimension must be positive");
  std::size_t un = static_cast<std::size_t>(n);
  if (tokens.size() != 1 + 2 * un * un)
    throw ParseError("expected " + std::to_string(2 * un * un) + " entry tokens, found " +
                     std::to_string(tokens.size() - 1));
  m.entries = ExactMatrix(un, exact(0));
  for (std::size_t k = 0; k < un * un; ++k)
    m.entries.a[k] = ExactComplex(parse_rational(tokens[1 + 2 * k]), parse_rational(tokens[2 + 2 * k]));
  return m;
}

inline ComplexMatrix load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open matrix file '" + path + "'");
  return read_matrix(f);
}

inline void save_matrix(const std::string& path, const ComplexMatrix& m) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write matrix file '" + path + "'");
  write_matrix(f, m);
}

}  // namespace detshallow
