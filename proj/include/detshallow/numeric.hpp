#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "detshallow/errors.hpp"

namespace detshallow {

// ---------------------------------------------------------------------------
// BigFloat: RAII wrapper over mpfr_t. Each value carries its own precision;
// binary operations produce a result at the larger of the two precisions.

namespace detail {
inline void widen_exponent_range() {
  thread_local bool done = false;
  if (!done) {
    mpfr_set_emax(mpfr_get_emax_max());
    mpfr_set_emin(mpfr_get_emin_min());
    done = true;
  }
}
}  // namespace detail

class BigFloat {
 public:
  static constexpr mpfr_prec_t kDefaultPrecision = 256;

  BigFloat() : BigFloat(kDefaultPrecision) {}
  explicit BigFloat(mpfr_prec_t prec) {
    detail::widen_exponent_range();
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  BigFloat(double x, mpfr_prec_t prec) : BigFloat(prec) { mpfr_set_d(v_, x, MPFR_RNDN); }
  BigFloat(long x, mpfr_prec_t prec) : BigFloat(prec) { mpfr_set_si(v_, x, MPFR_RNDN); }
  BigFloat(int x, mpfr_prec_t prec) : BigFloat(static_cast<long>(x), prec) {}
  BigFloat(const mpq_class& q, mpfr_prec_t prec) : BigFloat(prec) {
    mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
  }
  BigFloat(const mpz_class& z, mpfr_prec_t prec) : BigFloat(prec) {
    mpfr_set_z(v_, z.get_mpz_t(), MPFR_RNDN);
  }

  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  BigFloat& operator+=(const BigFloat& o) {
    widen_to(o);
    mpfr_add(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator-=(const BigFloat& o) {
    widen_to(o);
    mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator*=(const BigFloat& o) {
    widen_to(o);
    mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator/=(const BigFloat& o) {
    widen_to(o);
    mpfr_div(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }

  friend BigFloat operator+(BigFloat a, const BigFloat& b) { return a += b; }
  friend BigFloat operator-(BigFloat a, const BigFloat& b) { return a -= b; }
  friend BigFloat operator*(BigFloat a, const BigFloat& b) { return a *= b; }
  friend BigFloat operator/(BigFloat a, const BigFloat& b) { return a /= b; }
  friend BigFloat operator-(BigFloat a) {
    mpfr_neg(a.v_, a.v_, MPFR_RNDN);
    return a;
  }

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_); }
  friend std::partial_ordering operator<=>(const BigFloat& a, const BigFloat& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }

  bool is_zero() const { return mpfr_zero_p(v_); }
  bool is_finite() const { return mpfr_number_p(v_); }
  int sign() const { return mpfr_sgn(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long exponent2() const { return is_zero() ? 0 : mpfr_get_exp(v_); }

  // Exact conversion (every finite binary float is a dyadic rational).
  mpq_class to_mpq() const {
    mpq_class q;
    mpfr_get_q(q.get_mpq_t(), v_);
    return q;
  }
  mpz_class floor_to_mpz() const {
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), v_, MPFR_RNDD);
    return z;
  }

  std::string to_string(int digits = 20) const {
    if (!is_finite()) return mpfr_nan_p(v_) ? "nan" : (sign() > 0 ? "inf" : "-inf");
    char* s = nullptr;
    mpfr_asprintf(&s, "%.*Rg", digits, v_);
    std::string out(s);
    mpfr_free_str(s);
    return out;
  }

  friend BigFloat abs(BigFloat a) {
    mpfr_abs(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat sqrt(BigFloat a) {
    mpfr_sqrt(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat exp(BigFloat a) {
    mpfr_exp(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat log(BigFloat a) {
    mpfr_log(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat log2(BigFloat a) {
    mpfr_log2(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat cos(BigFloat a) {
    mpfr_cos(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat sin(BigFloat a) {
    mpfr_sin(a.v_, a.v_, MPFR_RNDN);
    return a;
  }
  friend BigFloat atan2(const BigFloat& y, const BigFloat& x) {
    BigFloat r(std::max(y.precision(), x.precision()));
    mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat pow(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.precision(), b.precision()));
    mpfr_pow(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat ceil(BigFloat a) {
    mpfr_ceil(a.v_, a.v_);
    return a;
  }
  friend BigFloat floor(BigFloat a) {
    mpfr_floor(a.v_, a.v_);
    return a;
  }

  static BigFloat pi(mpfr_prec_t prec) {
    BigFloat r(prec);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

 private:
  void widen_to(const BigFloat& o) {
    if (mpfr_get_prec(o.v_) > mpfr_get_prec(v_)) mpfr_prec_round(v_, mpfr_get_prec(o.v_), MPFR_RNDN);
  }

  mpfr_t v_;
};

// ---------------------------------------------------------------------------
// Finite field F_p with p = 2^61 - 1; used for fast exact identity testing.
// p = 3 mod 4, so Complex<ModP> is the field F_{p^2}.

struct ModP {
  static constexpr std::uint64_t kP = (std::uint64_t{1} << 61) - 1;
  std::uint64_t v = 0;

  ModP() = default;
  explicit ModP(std::uint64_t x) : v(x % kP) {}
  static ModP from_signed(long long x) {
    long long r = x % static_cast<long long>(kP);
    if (r < 0) r += static_cast<long long>(kP);
    return ModP(static_cast<std::uint64_t>(r));
  }
  static ModP from_mpz(const mpz_class& z) {
    static_assert(sizeof(unsigned long) == 8, "64-bit unsigned long required");
    return ModP(mpz_fdiv_ui(z.get_mpz_t(), kP));
  }
  static ModP from_mpq(const mpq_class& q) {
    ModP d = from_mpz(q.get_den());
    if (d.v == 0) throw ModeError("rational denominator vanishes modulo the field prime");
    return from_mpz(q.get_num()) * d.inverse();
  }

  friend ModP operator+(ModP a, ModP b) {
    std::uint64_t s = a.v + b.v;
    if (s >= kP) s -= kP;
    ModP r;
    r.v = s;
    return r;
  }
  friend ModP operator-(ModP a, ModP b) {
    ModP r;
    r.v = a.v >= b.v ? a.v - b.v : a.v + kP - b.v;
    return r;
  }
  friend ModP operator-(ModP a) { return ModP() - a; }
  friend ModP operator*(ModP a, ModP b) {
    unsigned __int128 m = static_cast<unsigned __int128>(a.v) * b.v;
    std::uint64_t lo = static_cast<std::uint64_t>(m & kP);
    std::uint64_t hi = static_cast<std::uint64_t>(m >> 61);
    std::uint64_t s = lo + hi;
    if (s >= kP) s -= kP;
    ModP r;
    r.v = s;
    return r;
  }
  ModP& operator+=(ModP o) { return *this = *this + o; }
  ModP& operator-=(ModP o) { return *this = *this - o; }
  ModP& operator*=(ModP o) { return *this = *this * o; }
  friend bool operator==(ModP a, ModP b) { return a.v == b.v; }

  ModP pow(std::uint64_t e) const {
    ModP base = *this, acc(1);
    while (e) {
      if (e & 1) acc *= base;
      base *= base;
      e >>= 1;
    }
    return acc;
  }
  ModP inverse() const {
    if (v == 0) throw ModeError("division by zero in F_p");
    return pow(kP - 2);
  }
  ModP& operator/=(ModP o) { return *this *= o.inverse(); }
  friend ModP operator/(ModP a, ModP b) { return a *= b.inverse(); }
};

// ---------------------------------------------------------------------------
// Complex numbers over an arbitrary real(-like) scalar.

template <class R>
struct Complex {
  R re{};
  R im{};

  Complex() = default;
  Complex(R r, R i) : re(std::move(r)), im(std::move(i)) {}

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Complex& operator*=(const Complex& o) {
    R a = re * o.re - im * o.im;
    R b = re * o.im + im * o.re;
    re = std::move(a);
    im = std::move(b);
    return *this;
  }
  Complex& operator/=(const Complex& o) { return *this *= o.inverse(); }

  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
  friend Complex operator/(Complex a, const Complex& b) { return a /= b; }
  friend Complex operator-(const Complex& a) { return Complex(R(-a.re), R(-a.im)); }
  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }

  Complex scaled(const R& s) const { return Complex(R(re * s), R(im * s)); }
  Complex conj() const { return Complex(re, R(-im)); }
  // |z|^2
  R norm() const { return R(re * re + im * im); }
  Complex inverse() const {
    R d = norm();
    return Complex(R(re / d), R(-im / d));
  }
};

using ExactComplex = Complex<mpq_class>;
using FloatComplex = Complex<BigFloat>;
using ModComplex = Complex<ModP>;
using ComplexScalar = std::variant<ExactComplex, FloatComplex>;

inline ExactComplex exact(const mpq_class& re, const mpq_class& im = 0) { return ExactComplex(re, im); }
inline ExactComplex exact(long re, long im = 0) { return ExactComplex(mpq_class(re), mpq_class(im)); }

inline bool is_zero(const ExactComplex& z) { return z.re == 0 && z.im == 0; }
inline bool is_one(const ExactComplex& z) { return z.re == 1 && z.im == 0; }

inline FloatComplex to_float(const ExactComplex& z, mpfr_prec_t prec) {
  return FloatComplex(BigFloat(z.re, prec), BigFloat(z.im, prec));
}
inline ModComplex to_mod(const ExactComplex& z) {
  return ModComplex(ModP::from_mpq(z.re), ModP::from_mpq(z.im));
}
inline ExactComplex to_exact(const FloatComplex& z) { return ExactComplex(z.re.to_mpq(), z.im.to_mpq()); }

inline ExactComplex to_exact_scalar(const ExactComplex& z) { return z; }
inline ExactComplex to_exact_scalar(const FloatComplex& z) { return to_exact(z); }
inline ExactComplex to_exact_scalar(const ComplexScalar& z) {
  return std::visit([](const auto& x) { return to_exact_scalar(x); }, z);
}

inline std::complex<double> to_cdouble(const ExactComplex& z) { return {z.re.get_d(), z.im.get_d()}; }
inline std::complex<double> to_cdouble(const FloatComplex& z) { return {z.re.to_double(), z.im.to_double()}; }
inline std::complex<double> to_cdouble(const ComplexScalar& z) {
  return std::visit([](const auto& v) { return to_cdouble(v); }, z);
}

inline BigFloat abs(const FloatComplex& z) { return sqrt(z.norm()); }
inline FloatComplex exp(const FloatComplex& z) {
  BigFloat m = exp(z.re);
  return FloatComplex(m * cos(z.im), m * sin(z.im));
}
// Principal branch.
inline FloatComplex log(const FloatComplex& z) { return FloatComplex(log(abs(z)), atan2(z.im, z.re)); }

// |z| for an exact value, evaluated at the given precision.
inline BigFloat abs_at(const ExactComplex& z, mpfr_prec_t prec) { return sqrt(BigFloat(mpq_class(z.norm()), prec)); }

// ---------------------------------------------------------------------------
// Scalar traits used by generic evaluators. `like` supplies the working
// precision (BigFloat) and is otherwise ignored.

template <class T>
struct ScalarOps;

template <>
struct ScalarOps<ExactComplex> {
  static ExactComplex zero(const ExactComplex&) { return ExactComplex(); }
  static ExactComplex one(const ExactComplex&) { return exact(1); }
  static ExactComplex from_exact(const ExactComplex& z, const ExactComplex&) { return z; }
};

template <>
struct ScalarOps<FloatComplex> {
  static mpfr_prec_t prec(const FloatComplex& like) { return like.re.precision(); }
  static FloatComplex zero(const FloatComplex& like) {
    return FloatComplex(BigFloat(prec(like)), BigFloat(prec(like)));
  }
  static FloatComplex one(const FloatComplex& like) {
    return FloatComplex(BigFloat(1L, prec(like)), BigFloat(prec(like)));
  }
  static FloatComplex from_exact(const ExactComplex& z, const FloatComplex& like) {
    return to_float(z, prec(like));
  }
};

template <>
struct ScalarOps<ModComplex> {
  static ModComplex zero(const ModComplex&) { return ModComplex(); }
  static ModComplex one(const ModComplex&) { return ModComplex(ModP(1), ModP()); }
  static ModComplex from_exact(const ExactComplex& z, const ModComplex&) { return to_mod(z); }
};

template <>
struct ScalarOps<std::complex<double>> {
  static std::complex<double> zero(const std::complex<double>&) { return {}; }
  static std::complex<double> one(const std::complex<double>&) { return {1.0, 0.0}; }
  static std::complex<double> from_exact(const ExactComplex& z, const std::complex<double>&) {
    return to_cdouble(z);
  }
};

// ---------------------------------------------------------------------------
// Exact parsing of decimal / scientific / p/q tokens.

inline mpq_class parse_rational(std::string_view tok) {
  std::string s(tok);
  if (s.empty()) throw ParseError("empty numeric token");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw ParseError("bad rational token '" + s + "'");
    if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false, any = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!any) throw ParseError("bad numeric token '" + s + "'");
  long exp10 = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw ParseError("bad numeric token '" + s + "'");
    try {
      std::size_t used = 0;
      exp10 = std::stol(s.substr(i + 1), &used);
      if (i + 1 + used != s.size()) throw ParseError("bad exponent in '" + s + "'");
    } catch (const std::logic_error&) {
      throw ParseError("bad exponent in '" + s + "'");
    }
  }
  mpz_class num(digits, 10);
  long shift = exp10 - frac_digits;
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  mpq_class q = shift >= 0 ? mpq_class(num * p10) : mpq_class(num, p10);
  q.canonicalize();
  return neg ? mpq_class(-q) : q;
}

inline std::string to_string(const mpq_class& q) { return q.get_str(); }

inline mpz_class factorial(unsigned long k) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), k);
  return f;
}
inline mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), n, k);
  return b;
}

}  // namespace detshallow
