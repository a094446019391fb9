#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace detshallow;

namespace {

const mpq_class kM = 32;  // covers |x| for random_complex entries (parts <= 20)

BigFloat abs_diff(const ExactComplex& a, const ExactComplex& b) {
  return abs(to_float(a - b, 256));
}

}  // namespace

TEST(Rounding, FloorsBothParts) {
  EXPECT_EQ(round_input(exact(mpq_class(3, 10)), 2), exact(mpq_class(1, 4)));
  EXPECT_EQ(round_input(exact(mpq_class(-3, 10)), 2), exact(mpq_class(-1, 2)));
  EXPECT_EQ(round_input(ExactComplex(mpq_class(5, 4), mpq_class(-1, 3)), 1), ExactComplex(1, mpq_class(-1, 2)));
  EXPECT_EQ(round_input(exact(7), 5), exact(7));
}

TEST(Rounding, ErrorBelowGrid) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    ExactComplex z = testutil::random_complex(rng);
    long r = 1 + static_cast<long>(rng() % 20);
    ExactComplex d = z - round_input(z, r);
    mpq_class unit(1);
    mpq_div_2exp(unit.get_mpq_t(), unit.get_mpq_t(), static_cast<mp_bitcnt_t>(r));
    EXPECT_GE(d.re, 0);
    EXPECT_LT(d.re, unit);
    EXPECT_GE(d.im, 0);
    EXPECT_LT(d.im, unit);
  }
}

TEST(Booleanize, IdentityCircuitReturnsRoundedInput) {
  CircuitBuilder b(1);
  Circuit c = b.finish(b.input(0));
  PrecisionBudget pb;
  pb.r = 3;
  pb.M = kM;
  auto bv = booleanized_evaluate(c, std::vector<ExactComplex>{ExactComplex(mpq_class(3, 10), mpq_class(-7, 5))}, pb);
  EXPECT_EQ(bv.value, round_input(ExactComplex(mpq_class(3, 10), mpq_class(-7, 5)), 3));
}

// Integer-scaled evaluation is exact arithmetic on the rounded inputs.
TEST(Booleanize, ExactOnRoundedInputs) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 40; ++t) {
    Circuit c = testutil::random_circuit(rng, 3, 12);
    if (c.metrics().formal_degree > 64) continue;
    PrecisionBudget pb;
    pb.r = 4 + static_cast<long>(rng() % 30);
    pb.M = kM;
    auto x = testutil::random_assignment(c, rng);
    auto bv = booleanized_evaluate(c, x, pb);
    EXPECT_EQ(bv.value, exact_on_rounded(c, bv)) << "trial " << t;
  }
}

TEST(Booleanize, FloatAssignmentAccepted) {
  std::mt19937_64 rng(33);
  Circuit c = testutil::random_circuit(rng, 2, 8);
  auto x = testutil::random_assignment(c, rng);
  std::vector<FloatComplex> xf;
  for (const auto& v : x) xf.push_back(to_float(v, 200));
  PrecisionBudget pb;
  pb.M = kM;
  EXPECT_EQ(booleanized_evaluate(c, x, pb).value, booleanized_evaluate(c, xf, pb).value);
}

TEST(Booleanize, ErrorWithinRoundingBound) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 40; ++t) {
    Circuit c = testutil::random_circuit(rng, 3, 10);
    CircuitShape s = shape_of(c);
    if (s.d > 16) continue;
    auto x = testutil::random_assignment(c, rng);
    for (long r : {8L, 24L, 60L}) {
      PrecisionBudget pb;
      pb.r = r;
      pb.M = kM;
      auto bv = booleanized_evaluate(c, x, pb);
      BigFloat eps_in = sqrt(BigFloat(bv.max_input_error, 256));
      BigFloat bound = rounding_error_bound(s.N, s.d, s.h, s.m, bv.report.M, eps_in);
      EXPECT_LE(abs_diff(bv.value, evaluate(c, x)).to_double(), bound.to_double() * (1 + 1e-12));
    }
  }
}

TEST(Booleanize, MagnitudeAndWidthBounds) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 40; ++t) {
    Circuit c = testutil::random_circuit(rng, 4, 14);
    if (c.metrics().formal_degree > 64 || c.metrics().depth == 0) continue;
    PrecisionBudget pb;
    pb.r = 16;
    pb.M = kM;
    auto bv = booleanized_evaluate(c, testutil::random_assignment(c, rng), pb);
    EXPECT_EQ(bv.report.magnitude_violations, 0u);
    EXPECT_LE(mpz_class(static_cast<unsigned long>(bv.report.max_bits)), bv.report.bound);
    std::uint64_t top = 0;
    for (auto w : bv.report.level_max_bits) top = std::max(top, w);
    EXPECT_EQ(top, bv.report.max_bits);
  }
}

TEST(Booleanize, Preconditions) {
  CircuitBuilder b(2);
  Circuit c = b.finish(b.mul(b.input(0), b.input(1)));
  std::vector<ExactComplex> x{exact(2), exact(3)};
  PrecisionBudget pb;
  pb.r = 0;
  EXPECT_THROW(booleanized_evaluate(c, x, pb), ParameterError);
  pb.r = 8;
  pb.M = 1;
  EXPECT_THROW(booleanized_evaluate(c, x, pb), InputError);
  pb.M = 4;
  pb.mode = PrecisionMode::Strict;
  pb.epsilon = 1e-3;
  EXPECT_THROW(booleanized_evaluate(c, x, pb), PreconditionError);
  pb.r = 400;
  EXPECT_EQ(booleanized_evaluate(c, x, pb).value, exact(6));
  EXPECT_THROW(booleanized_evaluate(c, std::vector<ExactComplex>{exact(1)}, pb), ArityError);
}

TEST(RoundingBound, MonotoneAndZeroAtZero) {
  const mpfr_prec_t prec = 128;
  EXPECT_TRUE(rounding_error_bound(3, 4, 3, 2, 2, BigFloat(prec)).is_zero());
  BigFloat prev(prec);
  for (long k = 40; k >= 10; k -= 5) {
    BigFloat eps(1L, prec);
    mpfr_div_2si(eps.raw(), eps.raw(), k, MPFR_RNDN);
    BigFloat b = rounding_error_bound(3, 4, 3, 2, 2, eps);
    EXPECT_GT(b, prev);
    prev = b;
  }
  BigFloat eps(1e-9, prec);
  EXPECT_LT(rounding_error_bound(3, 4, 3, 2, 2, eps), rounding_error_bound(3, 5, 3, 2, 2, eps));
  EXPECT_LT(rounding_error_bound(3, 4, 3, 2, 2, eps), rounding_error_bound(3, 4, 4, 2, 2, eps));
}

// With r from rounding_bits_for, the propagated error is at most eps.
TEST(RoundingBits, GiveTargetError) {
  for (std::uint64_t N : {1u, 5u, 40u})
    for (std::uint64_t d : {1u, 3u, 8u})
      for (std::uint64_t h : {1u, 4u, 9u})
        for (std::uint64_t m : {2u, 5u})
          for (double eps : {0.5, 1e-3, 1e-12})
            for (long M : {1L, 7L}) {
              CircuitShape s{N, d, h, m};
              mpz_class r = rounding_bits_for(s, M, eps);
              EXPECT_LE(propagated_log2_error(s, M, r).to_double(), std::log2(eps) + 1e-9);
              PrecisionBudget pb;
              pb.r = r.get_si();
              pb.M = M;
              pb.epsilon = eps;
              EXPECT_TRUE(strict_precondition_holds(s, pb));
            }
}

TEST(BitWidth, FormulaAndDepthEstimate) {
  CircuitShape s{4, 3, 5, 4};
  EXPECT_EQ(bit_width_bound(s, 10, 4), mpz_class(kBitWidthConstant * 27 * 5 * 10 * 2 * 3));
  CircuitBuilder b(1);
  PrecisionBudget pb;
  EXPECT_EQ(boolean_depth_estimate(b.finish(b.input(0)), pb), 0u);
  std::uint64_t prev = 0;
  for (std::size_t k = 2; k <= 16; k *= 2) {
    CircuitBuilder cb(k);
    std::vector<GateId> xs;
    for (VarIndex v = 0; v < k; ++v) xs.push_back(cb.input(v));
    std::uint64_t e = boolean_depth_estimate(cb.finish(cb.product(xs)), pb);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(Shape, CountsLiveVariablesOnly) {
  CircuitBuilder b(5);
  Circuit c = b.finish(b.mul(b.input(0), b.add(b.input(2), b.input(2))));
  CircuitShape s = shape_of(c);
  EXPECT_EQ(s.N, 2u);
  EXPECT_EQ(s.d, 2u);
  EXPECT_EQ(s.h, 2u);
  EXPECT_EQ(s.m, 2u);
}
