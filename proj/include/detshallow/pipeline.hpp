#pragma once

#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "detshallow/abs_det.hpp"
#include "detshallow/cac.hpp"
#include "detshallow/coeff_extract.hpp"
#include "detshallow/depth_reduce.hpp"
#include "detshallow/det_circuits.hpp"
#include "detshallow/log_transform.hpp"
#include "detshallow/matrix.hpp"
#include "detshallow/precision.hpp"

namespace detshallow {

enum class DetMode { Hermitian, Hurwitz, Abs };
enum class ParamMode { Strict, Practical };

struct PipelineOptions {
  DetMode mode = DetMode::Hermitian;
  ParamMode param_mode = ParamMode::Practical;
  long m0 = 64;
  std::optional<mpfr_prec_t> precision_bits;  // default 16 m0 + 128
  double theta = 0.4;
  long strict_constant = 40;
  bool verify = false;
  bool unsafe = false;
  bool force_cac = false;  // skip the exact fallback even when k >= n
  bool reduce_depth = false;
  bool booleanize = false;
  long rounding_bits = 64;
  std::optional<double> kappa;  // abs mode; defaults to 1/delta
  std::size_t oracle_limit = 64;
};

struct CircuitSummary {
  std::size_t size_pre = 0, size_post = 0;
  std::size_t depth_pre = 0, depth_post = 0;
  std::size_t mult_depth_pre = 0, mult_depth_post = 0;
  std::uint64_t degree = 0;
  bool reduced = false;
};

struct ApproxResult {
  FloatComplex estimate;
  std::optional<FloatComplex> log_estimate;
  std::optional<FloatComplex> series_log_estimate;  // same shift run on exact g-coefficients
  std::optional<ExactComplex> oracle;
  std::optional<double> rel_error;
  mpz_class k = 0;
  std::size_t t = 0;
  double theta = 0.4;
  std::vector<mpz_class> m_sequence;
  long r = 0;
  mpz_class algorithm_r = 0;  // reported only
  mpz_class algorithm_M = 0;  // reported only
  mpfr_prec_t precision_bits = 0;
  std::optional<CircuitSummary> circuit;
  std::optional<BitWidthReport> bitwidth;
  std::vector<double> certified_ratios;
  double min_certified_ratio = 0;
  bool exact_fallback = false;
  std::optional<AbsDetResult> abs_details;
  double wall_time_ms = 0;
  std::optional<Circuit> composed;  // the evaluated circuit, when one was built
};

// ---------------------------------------------------------------------------
// Composed circuit: entries -> g-coefficients -> f-coefficients -> shifted f(1).
// Variables: entry (i,j) is i*n + j; variable n*n is unused (the eliminated z);
// everything else is pinned.

struct PipelineCircuit {
  Circuit value;  // f-hat_t as a polynomial in the entries
  InterpolationPolynomialSpec spec;
};

inline PipelineCircuit pipeline_circuit(std::size_t n, SignMode sign, const CacSchedule& schedule,
                                        const CacBudget& budget) {
  if (budget.m.size() != schedule.points.size()) throw ParameterError("schedule/budget length mismatch");
  std::size_t m0 = budget.at(0);
  InterpolationPolynomialSpec spec{n, sign, Construction::CharPoly};
  Circuit g = samuelson_berkowitz_circuit(spec);
  MultiCircuit gcoef = extract_coefficients_batch(g, spec.z_var(), static_cast<long>(m0));
  MultiCircuit fcoef = log_coefficient_circuits(static_cast<long>(m0));

  CircuitBuilder b(spec.base_vars());
  std::vector<GateId> gc;
  for (std::size_t l = 0; l <= m0; ++l) gc.push_back(b.import(gcoef.view(l), {}));
  std::vector<std::optional<GateId>> fmap(fcoef.store->num_vars());
  for (std::size_t l = 0; l <= m0; ++l) fmap[l] = gc[l];
  fmap[m0 + 1] = b.zero();
  std::vector<GateId> fc;
  for (std::size_t l = 0; l <= m0; ++l) fc.push_back(b.import(fcoef.view(l), fmap));
  std::vector<GateId> steps;
  for (const auto& d : schedule.steps) steps.push_back(b.constant(d));
  GateId out = build_cac(b, fc, steps, budget);
  return {b.finish(out), spec};
}

// Exact coefficients [z^0..z^k] of g_A (or g_-A).
inline std::vector<ExactComplex> interpolation_coefficients(const ExactMatrix& A, SignMode sign, std::size_t k) {
  InterpolationPolynomialSpec spec{A.n, sign, Construction::CharPoly};
  Circuit g = samuelson_berkowitz_circuit(spec);
  MultiCircuit mc = extract_coefficients_batch(g, spec.z_var(), static_cast<long>(k));
  std::vector<ExactComplex> x(mc.store->num_vars(), exact(0));
  for (std::size_t i = 0; i < A.n; ++i)
    for (std::size_t j = 0; j < A.n; ++j) x[spec.entry_var(i, j)] = A(i, j);
  return evaluate(mc, x);
}

inline std::string schedule_dump(const CacSchedule& s) {
  std::ostringstream os;
  auto r = certified_ratios(s);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    auto p = to_cdouble(s.points[i]);
    os << i << ' ' << p.real() << ' ' << p.imag() << ' ';
    if (i == 0)
      os << 0;
    else
      os << step_length(s.steps[i - 1]);
    os << ' ';
    if (i < r.size())
      os << r[i];
    else
      os << '-';
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline double relative_error(const FloatComplex& est, const ExactComplex& oracle, mpfr_prec_t prec) {
  if (is_zero(oracle)) return INFINITY;
  FloatComplex o = to_float(oracle, prec);
  FloatComplex q = est / o - ScalarOps<FloatComplex>::one(o);
  return abs(q).to_double();
}

inline void check_class(const ComplexMatrix& A, DetMode mode, const mpq_class& delta, bool unsafe) {
  if (unsafe) return;
  const Certificate& c = A.certificate;
  MatrixClass want = mode == DetMode::Hermitian ? MatrixClass::Hermitian : MatrixClass::Hurwitz;
  if (c.cls != want)
    throw PreconditionError("matrix is not certified as " + class_tag(want) + " (got " + class_tag(c.cls) +
                            "); pass --unsafe to skip the check");
  if (c.delta < delta)
    throw PreconditionError("certificate delta " + c.delta.get_str() + " is below the requested delta " +
                            delta.get_str());
  if (mode == DetMode::Hermitian && !is_hermitian(A.entries)) throw PreconditionError("matrix is not Hermitian");
}

}  // namespace detail

inline ApproxResult approximate_determinant(const ComplexMatrix& A, double epsilon, const mpq_class& delta,
                                            const PipelineOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  if (!(epsilon > 0 && epsilon < 1)) throw ParameterError("epsilon must lie in (0,1)");
  if (delta <= 0 || delta >= 1) throw ParameterError("delta must lie in (0,1)");
  std::size_t n = A.n();
  if (n == 0) throw ParameterError("empty matrix");
  if (opt.verify && n > opt.oracle_limit) throw PreconditionError("matrix exceeds the oracle limit");
  ApproxResult res;
  res.theta = opt.theta;
  auto finish = [&]() {
    if (opt.verify) {
      res.oracle = exact_det(A.entries, opt.oracle_limit);
      res.rel_error = detail::relative_error(res.estimate, *res.oracle, std::max<mpfr_prec_t>(res.precision_bits, 128));
    }
    res.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  };

  if (opt.mode == DetMode::Abs) {
    double kappa = opt.kappa.value_or(1.0 / delta.get_d());
    res.precision_bits = opt.precision_bits.value_or(128);
    res.abs_details = abs_det_approx(A, epsilon, kappa, res.precision_bits);
    res.estimate = res.abs_details->estimate;
    res.k = res.abs_details->iterations;
    if (opt.verify) {
      ExactComplex d = exact_det(A.entries, opt.oracle_limit);
      res.oracle = d;
      mpfr_prec_t p = res.precision_bits;
      BigFloat absd = abs_at(d, p);
      res.rel_error = absd.is_zero() ? INFINITY : abs(res.estimate.re / absd - BigFloat(1L, p)).to_double();
    }
    res.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  }

  detail::check_class(A, opt.mode, delta, opt.unsafe);
  CacSchedule schedule = opt.mode == DetMode::Hermitian ? hermitian_schedule(delta) : hurwitz_schedule(delta);
  schedule.theta = opt.theta;
  res.t = schedule.t();
  res.certified_ratios = certified_ratios(schedule);
  res.min_certified_ratio = *std::min_element(res.certified_ratios.begin(), res.certified_ratios.end());

  mpz_class k = opt.param_mode == ParamMode::Strict
                    ? strict_m0(n, epsilon, opt.theta, schedule.t(), opt.strict_constant)
                    : mpz_class(opt.m0);
  res.k = k;
  if (k.fits_ulong_p()) {
    res.algorithm_r = algorithm_rounding_bits(k.get_ui());
    if (k <= 1000) res.algorithm_M = algorithm_constant_bound(k.get_ui());
  }

  if (k >= n && !opt.force_cac) {
    // The budget already covers every coefficient of the degree-n polynomial.
    res.exact_fallback = true;
    res.precision_bits = opt.precision_bits.value_or(256);
    ExactComplex d = exact_det(A.entries, std::max(opt.oracle_limit, n));
    res.estimate = to_float(d, res.precision_bits);
    return finish();
  }

  CacBudget budget = detshallow::budget(k, opt.theta, schedule.t(),
                                        opt.param_mode == ParamMode::Strict ? BudgetMode::Strict : BudgetMode::Practical);
  res.m_sequence = budget.m;
  std::size_t m0 = budget.at(0);
  res.precision_bits = opt.precision_bits.value_or(static_cast<mpfr_prec_t>(16 * m0 + 128));
  res.r = opt.booleanize ? opt.rounding_bits : static_cast<long>(res.precision_bits);
  SignMode sign = opt.mode == DetMode::Hermitian ? SignMode::Plain : SignMode::Negated;

  PipelineCircuit pc = pipeline_circuit(n, sign, schedule, budget);
  Circuit value = pc.value;
  CircuitSummary cs;
  Metrics mpre = value.metrics();
  cs.size_pre = mpre.size;
  cs.depth_pre = mpre.depth;
  cs.mult_depth_pre = value.multiplicative_depth();
  cs.degree = value.free_degree();
  if (opt.reduce_depth) {
    value = binarize_adds(depth_reduce(value));
    cs.reduced = true;
  }
  Metrics mpost = value.metrics();
  cs.size_post = mpost.size;
  cs.depth_post = mpost.depth;
  cs.mult_depth_post = value.multiplicative_depth();
  res.circuit = cs;
  res.composed = value;

  mpfr_prec_t prec = res.precision_bits;
  FloatComplex zero = to_float(exact(0), prec);
  std::vector<FloatComplex> x(value.num_vars(), zero);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x[pc.spec.entry_var(i, j)] = to_float(A.entries(i, j), prec);
  FloatComplex fhat;
  if (opt.booleanize) {
    std::vector<ExactComplex> xe(value.num_vars(), exact(0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) xe[pc.spec.entry_var(i, j)] = A.entries(i, j);
    PrecisionBudget pb;
    pb.r = opt.rounding_bits;
    pb.epsilon = epsilon;
    auto bv = booleanized_evaluate(value, xe, pb);
    res.bitwidth = bv.report;
    fhat = to_float(bv.value, prec);
  } else {
    fhat = evaluate(value, x);
  }
  res.log_estimate = fhat;

  // The same shift applied to exact coefficients of g.
  auto gco = interpolation_coefficients(A.entries, sign, m0);
  DerivativeSeries<FloatComplex> gs;
  for (const auto& c : gco) gs.values.push_back(to_float(c, prec));
  gs.convention = Convention::Coefficient;
  res.series_log_estimate = run_cac(gs, schedule, budget);

  FloatComplex est = exp(fhat);
  if (opt.mode == DetMode::Hurwitz && n % 2 == 1) est = -est;
  res.estimate = est;
  return finish();
}

}  // namespace detshallow
