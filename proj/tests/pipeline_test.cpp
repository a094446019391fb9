#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace detshallow;

namespace {

const mpq_class kDelta(3, 10);

PipelineOptions small_cac(DetMode mode, long m0) {
  PipelineOptions o;
  o.mode = mode;
  o.m0 = m0;
  o.force_cac = true;
  o.verify = true;
  return o;
}

double rel(const FloatComplex& a, const FloatComplex& b) { return abs(a - b).to_double() / abs(b).to_double(); }

}  // namespace

TEST(Pipeline, IdentityViaFallback) {
  ComplexMatrix I{ExactMatrix(3, exact(0)), {}};
  for (std::size_t i = 0; i < 3; ++i) I.entries(i, i) = exact(1);
  PipelineOptions o;
  o.unsafe = true;
  o.verify = true;
  ApproxResult r = approximate_determinant(I, 1e-3, kDelta, o);
  EXPECT_TRUE(r.exact_fallback);
  EXPECT_EQ(to_exact(r.estimate), exact(1));
  EXPECT_EQ(*r.rel_error, 0.0);
  EXPECT_FALSE(r.composed.has_value());
}

TEST(Pipeline, FallbackSignsMatchOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PipelineOptions o;
    o.verify = true;
    ComplexMatrix h = generate_hermitian(5, kDelta, seed, seed % 3);
    ApproxResult rh = approximate_determinant(h, 1e-3, kDelta, o);
    EXPECT_LT(*rh.rel_error, 1e-30);
    o.mode = DetMode::Hurwitz;
    ComplexMatrix s = generate_hurwitz(5, kDelta, seed);
    ApproxResult rs = approximate_determinant(s, 1e-3, kDelta, o);
    EXPECT_LT(*rs.rel_error, 1e-30);
  }
}

// The composed circuit and the shift run on exact g-coefficients compute the
// same quantity.
TEST(Pipeline, CircuitAgreesWithSeriesRun) {
  for (DetMode mode : {DetMode::Hermitian, DetMode::Hurwitz}) {
    ComplexMatrix A = mode == DetMode::Hermitian ? generate_hermitian(3, kDelta, 4) : generate_hurwitz(3, kDelta, 4);
    ApproxResult r = approximate_determinant(A, 1e-3, kDelta, small_cac(mode, 6));
    ASSERT_TRUE(r.log_estimate && r.series_log_estimate);
    EXPECT_LT(rel(*r.log_estimate, *r.series_log_estimate), 1e-40);
    EXPECT_FALSE(r.exact_fallback);
    EXPECT_EQ(r.m_sequence.size(), r.t + 1);
  }
}

TEST(Pipeline, HurwitzOddDimensionNegatesExp) {
  ComplexMatrix A = generate_hurwitz(3, kDelta, 2);
  ApproxResult r = approximate_determinant(A, 1e-3, kDelta, small_cac(DetMode::Hurwitz, 4));
  FloatComplex e = exp(*r.log_estimate);
  EXPECT_LT(abs(r.estimate + e).to_double(), 1e-60 * abs(e).to_double());
}

TEST(Pipeline, Deterministic) {
  ComplexMatrix A = generate_hermitian(3, kDelta, 9);
  PipelineOptions o = small_cac(DetMode::Hermitian, 5);
  ApproxResult a = approximate_determinant(A, 1e-3, kDelta, o);
  ApproxResult b = approximate_determinant(A, 1e-3, kDelta, o);
  EXPECT_TRUE(a.estimate.re == b.estimate.re && a.estimate.im == b.estimate.im);
  EXPECT_EQ(report_json(a, false), report_json(b, false));
}

TEST(Pipeline, ReducedCircuitGivesSameEstimate) {
  ComplexMatrix A = generate_hurwitz(2, kDelta, 1);
  PipelineOptions o = small_cac(DetMode::Hurwitz, 2);
  ApproxResult plain = approximate_determinant(A, 1e-3, kDelta, o);
  o.reduce_depth = true;
  ApproxResult red = approximate_determinant(A, 1e-3, kDelta, o);
  ASSERT_TRUE(red.circuit && red.circuit->reduced);
  EXPECT_LE(red.circuit->mult_depth_post, reduced_depth_bound(red.circuit->degree));
  EXPECT_LT(rel(*red.log_estimate, *plain.log_estimate), 1e-40);
}

TEST(Pipeline, BooleanizedMatchesFloat) {
  ComplexMatrix A = generate_hurwitz(2, kDelta, 3);
  PipelineOptions o = small_cac(DetMode::Hurwitz, 2);
  ApproxResult f = approximate_determinant(A, 1e-3, kDelta, o);
  o.booleanize = true;
  o.rounding_bits = 96;
  ApproxResult b = approximate_determinant(A, 1e-3, kDelta, o);
  ASSERT_TRUE(b.bitwidth);
  EXPECT_EQ(b.bitwidth->magnitude_violations, 0u);
  EXPECT_EQ(b.r, 96);
  EXPECT_LT(rel(*b.log_estimate, *f.log_estimate), 1e-12);
}

TEST(Pipeline, ReportFields) {
  ComplexMatrix A = generate_hermitian(3, kDelta, 1);
  ApproxResult r = approximate_determinant(A, 1e-3, kDelta, small_cac(DetMode::Hermitian, 4));
  auto j = report_json(r);
  for (const char* key : {"estimate", "log_estimate", "oracle", "rel_error", "k", "t", "theta", "m_sequence", "r",
                          "algorithm_r", "algorithm_M", "precision_bits", "circuit", "bitwidth", "schedule",
                          "exact_fallback", "wall_time_ms"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["k"], "4");
  EXPECT_EQ(j["t"], 10);
  EXPECT_EQ(j["algorithm_r"], "268435456");  // 4^14
  EXPECT_EQ(j["algorithm_M"], "24");
  EXPECT_EQ(r.precision_bits, 16 * 4 + 128);
  EXPECT_GE(r.min_certified_ratio, std::exp(0.4));
  EXPECT_NE(report_text(r).find("estimate"), std::string::npos);

  PipelineOptions quiet = small_cac(DetMode::Hermitian, 4);
  quiet.verify = false;
  ApproxResult q = approximate_determinant(A, 1e-3, kDelta, quiet);
  EXPECT_FALSE(q.rel_error.has_value());
  EXPECT_TRUE(report_json(q)["rel_error"].is_null());
}

TEST(Pipeline, StrictModeBudgets) {
  ComplexMatrix A = generate_hermitian(4, mpq_class(1, 2), 0);
  PipelineOptions o;
  o.param_mode = ParamMode::Strict;
  o.verify = true;
  ApproxResult r = approximate_determinant(A, 0.5, mpq_class(1, 2), o);
  EXPECT_TRUE(r.exact_fallback);
  EXPECT_EQ(r.k, strict_m0(4, 0.5, 0.4, 10, 40));
  o.force_cac = true;
  EXPECT_THROW(approximate_determinant(A, 0.5, mpq_class(1, 2), o), BudgetError);
}

TEST(Pipeline, Preconditions) {
  ComplexMatrix h = generate_hermitian(3, kDelta, 0);
  ComplexMatrix s = generate_hurwitz(3, kDelta, 0);
  PipelineOptions o;
  EXPECT_THROW(approximate_determinant(h, 0, kDelta, o), ParameterError);
  EXPECT_THROW(approximate_determinant(h, 1e-3, mpq_class(0), o), ParameterError);
  EXPECT_THROW(approximate_determinant(h, 1e-3, mpq_class(1, 2), o), PreconditionError);
  EXPECT_THROW(approximate_determinant(s, 1e-3, kDelta, o), PreconditionError);
  o.unsafe = true;
  EXPECT_NO_THROW(approximate_determinant(s, 1e-3, kDelta, o));  // every class check skipped
  o.mode = DetMode::Hurwitz;
  o.unsafe = false;
  EXPECT_THROW(approximate_determinant(h, 1e-3, kDelta, o), PreconditionError);
  EXPECT_NO_THROW(approximate_determinant(s, 1e-3, kDelta, o));
}

TEST(Pipeline, AbsMode) {
  ComplexMatrix g = generate(MatrixClass::General, 4, mpq_class(1, 2), 3);
  PipelineOptions o;
  o.mode = DetMode::Abs;
  o.verify = true;
  ApproxResult r = approximate_determinant(g, 1e-4, mpq_class(1, 2), o);
  ASSERT_TRUE(r.abs_details);
  EXPECT_LT(*r.rel_error, 1e-4);
  EXPECT_EQ(r.abs_details->v.size(), 4u);
}
