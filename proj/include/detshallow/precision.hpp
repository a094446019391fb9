#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "detshallow/circuit.hpp"

namespace detshallow {

enum class PrecisionMode { Strict, Practical };

struct PrecisionBudget {
  long r = 64;           // rounding bits
  mpq_class M = 1;       // input-magnitude bound
  double epsilon = 1e-3;  // target additive error
  PrecisionMode mode = PrecisionMode::Practical;
};

// Constant in the bit-width bound B = c * d^3 * h * r * ceil(log2 m) * ceil(log2(2M)).
constexpr long kBitWidthConstant = 4;

// Structural parameters of a circuit as used by the rounding bounds.
struct CircuitShape {
  std::uint64_t N = 0;  // variables reachable from the output (pins included)
  std::uint64_t d = 0;  // formal degree
  std::uint64_t h = 0;  // depth
  std::uint64_t m = 2;  // max(2, largest addition fan-in)
  std::uint64_t log_m() const {
    std::uint64_t k = 0;
    while ((std::uint64_t{1} << k) < m) ++k;
    return k;
  }
};

inline CircuitShape shape_of(const Circuit& c) {
  CircuitShape s;
  auto live = c.cone();
  std::vector<char> used(c.num_vars(), 0);
  for (GateId g = 0; g <= c.output(); ++g)
    if (live[g] && c.gate(g).kind == GateKind::Input) used[c.gate(g).var] = 1;
  s.N = static_cast<std::uint64_t>(std::count(used.begin(), used.end(), 1));
  Metrics mt = c.metrics();
  s.d = mt.formal_degree;
  s.h = mt.depth;
  s.m = std::max<std::uint64_t>(2, c.max_add_fanin());
  return s;
}

// R_r(z): both parts floored to multiples of 2^-r.
inline ExactComplex round_input(const ExactComplex& z, long r) {
  auto fl = [r](const mpq_class& q) {
    mpz_class scale = 1;
    mpz_mul_2exp(scale.get_mpz_t(), scale.get_mpz_t(), static_cast<mp_bitcnt_t>(r));
    mpq_class s = q * scale;
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
    return mpq_class(f, scale);
  };
  ExactComplex out(fl(z.re), fl(z.im));
  out.re.canonicalize();
  out.im.canonicalize();
  return out;
}
inline ExactComplex round_input(const FloatComplex& z, long r) { return round_input(to_exact(z), r); }
inline ExactComplex round_input(const ComplexScalar& z, long r) {
  return std::visit([r](const auto& x) { return round_input(x, r); }, z);
}

namespace detail {

inline BigFloat log2_of(const mpq_class& q, mpfr_prec_t prec = 128) { return log2(BigFloat(q, prec)); }

}  // namespace detail

// log2 of the gate-value bound (2M)^(d h ceil(log2 m) + 1).
inline BigFloat log2_value_bound(std::uint64_t d, std::uint64_t h, std::uint64_t log_m, const mpq_class& M) {
  const mpfr_prec_t prec = 128;
  BigFloat e = BigFloat(mpz_class(static_cast<unsigned long>(d)), prec) * BigFloat(static_cast<long>(h), prec) *
                   BigFloat(static_cast<long>(log_m), prec) +
               BigFloat(1L, prec);
  return e * detail::log2_of(2 * M, prec);
}

// N d eps (2M)^(2 h d^2 ceil(log2 m) + 1).
inline BigFloat rounding_error_bound(std::uint64_t N, std::uint64_t d, std::uint64_t h, std::uint64_t m,
                                     const mpq_class& M, const BigFloat& eps_in) {
  const mpfr_prec_t prec = std::max<mpfr_prec_t>(128, eps_in.precision());
  if (eps_in.sign() == 0) return BigFloat(prec);
  CircuitShape s{N, d, h, m};
  BigFloat df(static_cast<long>(d), prec);
  BigFloat expo = BigFloat(2L, prec) * BigFloat(static_cast<long>(h), prec) * df * df *
                      BigFloat(static_cast<long>(s.log_m()), prec) +
                  BigFloat(1L, prec);
  BigFloat factor = exp(expo * log(BigFloat(2 * M, prec)));
  return BigFloat(static_cast<long>(N), prec) * df * eps_in * factor;
}

// Smallest integer r exceeding (10 h d^3 ceil(log2 m) + 1) log2(4 N d M / eps).
inline mpz_class rounding_bits_for(const CircuitShape& s, const mpq_class& M, double eps) {
  const mpfr_prec_t prec = 256;
  BigFloat d(mpz_class(static_cast<unsigned long>(s.d)), prec);
  BigFloat lead = BigFloat(10L, prec) * BigFloat(static_cast<long>(s.h), prec) * d * d * d *
                      BigFloat(static_cast<long>(s.log_m()), prec) +
                  BigFloat(1L, prec);
  BigFloat arg = BigFloat(4L, prec) * BigFloat(static_cast<long>(s.N), prec) * d * BigFloat(M, prec) /
                 BigFloat(eps, prec);
  BigFloat v = floor(lead * log2(arg));
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), v.raw(), MPFR_RNDD);
  return out + 1;
}

// log2 of 2^(-r+1) N d (2M)^(10 h d^3 ceil(log2 m) + 1), the propagated
// intermediate bound.
inline BigFloat propagated_log2_error(const CircuitShape& s, const mpq_class& M, const mpz_class& r) {
  const mpfr_prec_t prec = 256;
  BigFloat d(mpz_class(static_cast<unsigned long>(s.d)), prec);
  BigFloat expo = BigFloat(10L, prec) * BigFloat(static_cast<long>(s.h), prec) * d * d * d *
                      BigFloat(static_cast<long>(s.log_m()), prec) +
                  BigFloat(1L, prec);
  return BigFloat(1L, prec) - BigFloat(r, prec) + log2(BigFloat(static_cast<long>(s.N), prec) * d) +
         expo * log2(BigFloat(2 * M, prec));
}

// Strict-mode precondition: r > (2 h d^2 ceil(log2 m) + 1) log2(4 N M d / eps).
inline bool strict_precondition_holds(const CircuitShape& s, const PrecisionBudget& b) {
  const mpfr_prec_t prec = 256;
  BigFloat d(mpz_class(static_cast<unsigned long>(s.d)), prec);
  BigFloat lead = BigFloat(2L, prec) * BigFloat(static_cast<long>(s.h), prec) * d * d *
                      BigFloat(static_cast<long>(s.log_m()), prec) +
                  BigFloat(1L, prec);
  BigFloat arg = BigFloat(4L, prec) * BigFloat(static_cast<long>(s.N), prec) * d * BigFloat(b.M, prec) /
                 BigFloat(b.epsilon, prec);
  return BigFloat(b.r, prec) > lead * log2(arg);
}

// B = c d^3 h r ceil(log2 m) ceil(log2(2M)).
inline mpz_class bit_width_bound(const CircuitShape& s, long r, const mpq_class& M) {
  mpz_class d(static_cast<unsigned long>(s.d));
  BigFloat lg = ceil(detail::log2_of(2 * M));
  mpz_class lgz;
  mpfr_get_z(lgz.get_mpz_t(), lg.raw(), MPFR_RNDN);
  return kBitWidthConstant * d * d * d * mpz_class(static_cast<unsigned long>(s.h)) * r * mpz_class(static_cast<unsigned long>(s.log_m())) *
         lgz;
}

// Modeled Boolean depth: h * ceil(log2(m * B)).
inline std::uint64_t boolean_depth_estimate(const Circuit& c, const PrecisionBudget& b) {
  CircuitShape s = shape_of(c);
  if (s.h == 0) return 0;
  mpz_class mb = bit_width_bound(s, b.r, b.M) * mpz_class(static_cast<unsigned long>(s.m));
  mpz_class mb1 = mb - 1;
  std::uint64_t bits = mb <= 1 ? 0 : mpz_sizeinbase(mb1.get_mpz_t(), 2);
  return s.h * bits;
}

// Reported-only parameters of the main algorithm for derivative budget k.
inline mpz_class algorithm_rounding_bits(unsigned long k) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), k, 14);
  return out;
}
inline mpz_class algorithm_constant_bound(unsigned long k) { return factorial(k); }

struct BitWidthReport {
  std::vector<std::uint64_t> level_max_bits;  // indexed by gate height
  std::uint64_t max_bits = 0;
  mpz_class bound = 0;                         // B
  std::uint64_t magnitude_violations = 0;      // gates above (2M)^(d h ceil(log m) + 1)
  double worst_magnitude_margin = INFINITY;    // min over gates of log2(bound) - log2|value|
  long r = 0;
  mpq_class M = 1;
  CircuitShape shape;
};

struct BooleanizedValue {
  ExactComplex value;
  BitWidthReport report;
  std::vector<ExactComplex> rounded;  // full rounded assignment (pins included)
  mpq_class max_input_error = 0;     // max_i |R_r(x_i) - x_i|^2
};

namespace detail {

struct GaussInt {
  mpz_class re, im;
};

inline std::uint64_t bit_width(const GaussInt& z) {
  std::uint64_t a = z.re == 0 ? 0 : mpz_sizeinbase(z.re.get_mpz_t(), 2);
  std::uint64_t b = z.im == 0 ? 0 : mpz_sizeinbase(z.im.get_mpz_t(), 2);
  return std::max(a, b);
}

inline mpz_class scaled_integer(const mpq_class& q, long r) {
  mpq_class s = q;
  mpq_mul_2exp(s.get_mpq_t(), s.get_mpq_t(), static_cast<mp_bitcnt_t>(r));
  if (s.get_den() != 1) throw Error("rounded input is not on the 2^-r grid");
  return s.get_num();
}

}  // namespace detail

// Rounds every input (pins included), then evaluates with Gaussian integers
// X_v representing X_v * 2^(-r d(v)). Addition aligns children by shifting.
template <class T>
BooleanizedValue booleanized_evaluate(const Circuit& c, const std::vector<T>& assignment, const PrecisionBudget& b) {
  if (b.r < 1) throw ParameterError("rounding bits must be positive");
  if (b.M < 1) throw ParameterError("magnitude bound must be at least 1");
  if (assignment.size() != c.num_vars()) throw ArityError("assignment length does not match the circuit");
  if (!c.no_constant_inputs()) throw PreconditionError("circuit has constant-labelled inputs");
  CircuitShape shape = shape_of(c);
  if (b.mode == PrecisionMode::Strict && !strict_precondition_holds(shape, b))
    throw PreconditionError("rounding bits below the strict-mode requirement");

  BooleanizedValue out;
  auto live = c.cone();
  std::vector<ExactComplex> original(c.num_vars());
  out.rounded.resize(c.num_vars());
  mpq_class M = b.M;
  for (VarIndex v = 0; v < c.num_vars(); ++v) {
    original[v] = c.is_pinned(v) ? *c.pins()[v] : to_exact_scalar(assignment[v]);
    if (!c.is_pinned(v) && original[v].norm() > b.M * b.M)
      throw InputError("input " + std::to_string(v) + " exceeds the magnitude bound");
    out.rounded[v] = round_input(original[v], b.r);
    ExactComplex diff = out.rounded[v] - original[v];
    out.max_input_error = std::max(out.max_input_error, mpq_class(diff.norm()));
    // Bounds need M to cover pinned constants and rounded values too.
    for (const ExactComplex* z : {&original[v], &out.rounded[v]})
      while (z->norm() > M * M) M *= 2;
  }

  std::size_t count = c.output() + 1;
  std::vector<detail::GaussInt> val(count);
  std::vector<std::uint64_t> deg(count, 0), height(count, 0);
  BitWidthReport& rep = out.report;
  rep.r = b.r;
  rep.M = M;
  rep.shape = shape;
  rep.bound = bit_width_bound(shape, b.r, M);
  const std::uint64_t kMaxBits = std::uint64_t{1} << 28;
  for (GateId g = 0; g < count; ++g) {
    if (!live[g]) continue;
    GateView v = c.gate(g);
    detail::GaussInt& x = val[g];
    switch (v.kind) {
      case GateKind::Input:
        deg[g] = 1;
        x.re = detail::scaled_integer(out.rounded[v.var].re, b.r);
        x.im = detail::scaled_integer(out.rounded[v.var].im, b.r);
        break;
      case GateKind::Add:
        for (GateId ch : v.children) {
          deg[g] = std::max(deg[g], deg[ch]);
          height[g] = std::max(height[g], height[ch] + 1);
        }
        for (GateId ch : v.children) {
          auto shift = static_cast<mp_bitcnt_t>((deg[g] - deg[ch]) * static_cast<std::uint64_t>(b.r));
          mpz_class re = val[ch].re, im = val[ch].im;
          mpz_mul_2exp(re.get_mpz_t(), re.get_mpz_t(), shift);
          mpz_mul_2exp(im.get_mpz_t(), im.get_mpz_t(), shift);
          x.re += re;
          x.im += im;
        }
        break;
      case GateKind::Mul: {
        const auto& l = val[v.children[0]];
        const auto& rr = val[v.children[1]];
        deg[g] = deg[v.children[0]] + deg[v.children[1]];
        height[g] = std::max(height[v.children[0]], height[v.children[1]]) + 1;
        x.re = l.re * rr.re - l.im * rr.im;
        x.im = l.re * rr.im + l.im * rr.re;
        break;
      }
    }
    if (deg[g] * static_cast<std::uint64_t>(b.r) > kMaxBits)
      throw PreconditionError("booleanized evaluation exceeds the supported width");
    std::uint64_t bits = detail::bit_width(x);
    if (rep.level_max_bits.size() <= height[g]) rep.level_max_bits.resize(height[g] + 1, 0);
    rep.level_max_bits[height[g]] = std::max(rep.level_max_bits[height[g]], bits);
    rep.max_bits = std::max(rep.max_bits, bits);
    if (x.re != 0 || x.im != 0) {
      // log2 |value| = log2 |X| - r d(v)
      const mpfr_prec_t prec = 64;
      BigFloat nrm = BigFloat(mpz_class(x.re * x.re + x.im * x.im), prec);
      BigFloat lv = log2(nrm) / BigFloat(2L, prec) -
                    BigFloat(mpz_class(static_cast<unsigned long>(deg[g] * static_cast<std::uint64_t>(b.r))), prec);
      BigFloat lb = log2_value_bound(deg[g], height[g], shape.log_m(), M);
      double margin = (lb - lv).to_double();
      rep.worst_magnitude_margin = std::min(rep.worst_magnitude_margin, margin);
      if (margin < 0) ++rep.magnitude_violations;
    }
  }
  const auto& o = val[c.output()];
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(deg[c.output()] * b.r));
  out.value = ExactComplex(mpq_class(o.re, den), mpq_class(o.im, den));
  out.value.re.canonicalize();
  out.value.im.canonicalize();
  return out;
}

// Exact value of the circuit on the rounded inputs (pins rounded as well).
inline ExactComplex exact_on_rounded(const Circuit& c, const BooleanizedValue& bv) {
  return evaluate_unpinned(c, bv.rounded);
}

}  // namespace detshallow
