#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace detshallow;

namespace {

const mpq_class kDelta(3, 10);

DerivativeSeries<FloatComplex> float_series(const std::vector<ExactComplex>& coeffs, std::size_t len,
                                            mpfr_prec_t prec) {
  DerivativeSeries<FloatComplex> g;
  g.convention = Convention::Coefficient;
  for (const auto& c : coeffs) g.values.push_back(to_float(c, prec));
  while (g.values.size() < len) g.values.push_back(to_float(exact(0), prec));
  return g;
}

std::size_t ceil_log3(double x) { return static_cast<std::size_t>(std::ceil(std::log(x) / std::log(3.0) - 1e-12)); }

}  // namespace

// ---------------------------------------------------------------- schedules

TEST(Schedule, HermitianCrossOverPoints) {
  CacSchedule s = hermitian_schedule(kDelta);
  std::vector<ExactComplex> want{exact(0),
                                 exact(0, 0) + ExactComplex(0, mpq_class(1, 4)),
                                 ExactComplex(0, mpq_class(1, 2)),
                                 ExactComplex(mpq_class(1, 4), mpq_class(1, 2)),
                                 ExactComplex(mpq_class(1, 2), mpq_class(1, 2)),
                                 ExactComplex(mpq_class(3, 4), mpq_class(1, 2)),
                                 ExactComplex(1, mpq_class(1, 2))};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(s.points[i], want[i]) << i;
  EXPECT_EQ(s.points.back(), exact(1));
  EXPECT_EQ(s.theta, 0.4);
}

TEST(Schedule, HurwitzLeadingPoints) {
  CacSchedule s = hurwitz_schedule(kDelta);
  EXPECT_EQ(s.points[0], exact(0));
  EXPECT_EQ(s.points[1], exact(mpq_class(1, 6)));
  EXPECT_EQ(s.points[2], exact(mpq_class(1, 3)));
  EXPECT_EQ(s.points[3], exact(mpq_class(1, 2)));
  for (const auto& p : s.points) {
    EXPECT_EQ(p.im, 0);
    EXPECT_GE(p.re, 0);
    EXPECT_LE(p.re, 1);
  }
}

// Segment counts frozen from an independent symbolic construction.
TEST(Schedule, FrozenSegmentCounts) {
  struct Row {
    mpq_class delta;
    std::size_t herm, hurw;
  };
  for (const Row& r : {Row{mpq_class(3, 10), 10, 7}, Row{mpq_class(1, 10), 11, 8}, Row{mpq_class(1, 2), 10, 7},
                       Row{mpq_class(1, 100), 14, 11}}) {
    EXPECT_EQ(hermitian_schedule(r.delta).t(), r.herm);
    EXPECT_EQ(hurwitz_schedule(r.delta).t(), r.hurw);
  }
}

// t = ceil(log3(5 / (2 delta))) + c with c = 8 (Hermitian) and 5 (Hurwitz).
TEST(Schedule, SegmentCountLaw) {
  for (int k = 1; k < 100; k += 7) {
    mpq_class delta(k, 100);
    std::size_t j = ceil_log3(2.5 / delta.get_d());
    EXPECT_EQ(hermitian_schedule(delta).t(), j + 8) << k;
    EXPECT_EQ(hurwitz_schedule(delta).t(), j + 5) << k;
    std::size_t base = ceil_log3(1.0 / delta.get_d());
    EXPECT_GE(hermitian_schedule(delta).t(), base + 8);
    EXPECT_LE(hermitian_schedule(delta).t(), base + 9);
  }
}

TEST(Schedule, StepsNonIncreasingAndTermination) {
  for (int k = 1; k < 100; k += 3) {
    mpq_class delta(k, 100);
    for (const CacSchedule& s : {hermitian_schedule(delta), hurwitz_schedule(delta)}) {
      EXPECT_TRUE(schedule_violations(s).empty());
      for (std::size_t i = 1; i < s.steps.size(); ++i)
        EXPECT_LE(step_length(s.steps[i]), step_length(s.steps[i - 1]) + 1e-15);
      const ExactComplex& last = s.points[s.t() - 1];
      if (s.kind == ScheduleKind::Hermitian)
        EXPECT_LE(last.im, delta / 5);
      else
        EXPECT_GE(last.re, 1 - delta / 5);
    }
  }
}

TEST(Schedule, RejectsBadDelta) {
  EXPECT_THROW(hermitian_schedule(mpq_class(0)), ParameterError);
  EXPECT_THROW(hurwitz_schedule(mpq_class(1)), ParameterError);
}

TEST(Schedule, CertifiedRatiosAtLeastThreeHalves) {
  for (int k = 5; k < 100; k += 5) {
    mpq_class delta(k, 100);
    for (const CacSchedule& s : {hermitian_schedule(delta), hurwitz_schedule(delta)})
      for (double r : certified_ratios(s)) EXPECT_GE(r, 1.5);
  }
}

TEST(Schedule, RootRatiosOnGeneratedInstances) {
  CacSchedule hs = hermitian_schedule(kDelta), ss = hurwitz_schedule(kDelta);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<std::complex<double>> hr, sr;
    for (const auto& z : root_locations(generate_hermitian(8, kDelta, seed).certificate.spectrum))
      hr.push_back(to_cdouble(z));
    std::vector<ExactComplex> neg;
    for (const auto& w : generate_hurwitz(8, kDelta, seed).certificate.spectrum) neg.push_back(exact(0) - w);
    for (const auto& z : root_locations(neg)) sr.push_back(to_cdouble(z));
    for (double r : root_ratios(hs, hr)) EXPECT_GE(r, std::exp(0.4));
    for (double r : root_ratios(ss, sr)) EXPECT_GE(r, 1.5);
  }
}

// ---------------------------------------------------------------- budgets

TEST(Budget, FirstStepFrozen) {
  CacBudget b = budget(100, 0.4, 1);
  ASSERT_EQ(b.m.size(), 2u);
  EXPECT_EQ(b.m[1], 5);
}

TEST(Budget, FrozenStrictSequence) {
  CacBudget b = budget(1000000, 0.4, 4);
  std::vector<mpz_class> want{1000000, 14477, 303, 11, 1};
  EXPECT_EQ(b.m, want);
}

TEST(Budget, PracticalStepWithThetaOne) {
  CacBudget b = budget(mpz_class(1000), 1.0, 1, BudgetMode::Practical);
  EXPECT_EQ(b.m[1], mpz_class(static_cast<unsigned long>(std::ceil(1000.0 / (2 * std::log(1000.0))))));
}

TEST(Budget, ExhaustionNamesSegment) {
  try {
    budget(100, 0.4, 3);
    FAIL() << "expected exhaustion";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.segment(), 3u);
  }
  EXPECT_THROW(budget(10, 0.4, 1), ParameterError);
  EXPECT_THROW(budget(100, 1.5, 1), ParameterError);
}

TEST(Budget, PracticalFloor) {
  CacBudget b = budget(64, 0.4, 10, BudgetMode::Practical);
  EXPECT_EQ(b.m[0], 64);
  for (std::size_t i = 1; i <= 10; ++i) EXPECT_EQ(b.m[i], 8);
}

TEST(StrictM0, FrozenValues) {
  EXPECT_EQ(strict_m0(4, 0.5, 0.4, 1), 329);
  EXPECT_EQ(strict_m0(4, 0.5, 0.4, 1, 40), 5260);
  EXPECT_EQ(strict_m0(16, 0.1, 0.4, 1), 1073);
  EXPECT_EQ(strict_m0(16, 0.1, 0.4, 2), 147814);
  EXPECT_EQ(strict_m0(16, 0.1, 0.4, 2, 40), 9460093);
  EXPECT_EQ(strict_m0(8, 1e-3, 0.4, 3), 104310279);
  EXPECT_EQ(strict_m0(8, 1e-3, 0.4, 3, 40), mpz_class("26703431291"));
  EXPECT_EQ(strict_m0(16, 0.1, 0.4, 8), mpz_class("5055228393869672131866"));
}

TEST(StrictM0, Monotone) {
  for (std::size_t t = 1; t < 8; ++t) {
    EXPECT_LE(strict_m0(16, 0.1, 0.4, t), strict_m0(16, 0.1, 0.4, t + 1));
    EXPECT_GE(strict_m0(16, 0.1, 0.4, t, 40), strict_m0(16, 0.1, 0.4, t, 10));
  }
  for (double eps : {0.5, 0.1, 0.01, 1e-4}) EXPECT_LE(strict_m0(16, eps, 0.4, 3), strict_m0(16, eps / 10, 0.4, 3));
}

TEST(StrictM0, StrictSequenceStaysAboveLowerBound) {
  const std::size_t n = 16, t = 8;
  const double eps = 0.1, theta = 0.4;
  CacBudget b = budget(strict_m0(n, eps, theta, t), theta, t);
  double floor = 10 * (static_cast<double>(t) + std::log(n / (eps * theta)));
  for (const auto& m : b.m) EXPECT_GE(m.get_d(), floor);
  EXPECT_EQ(b.m.back(), 23981);
}

// ---------------------------------------------------------------- shifting

TEST(TaylorShift, LinearFunctionShiftsExactly) {
  CacState<ExactComplex> st{0, {exact(0), exact(1), exact(0), exact(0)}};
  auto out = taylor_shift(st, exact(mpq_class(1, 2)), 3);
  EXPECT_EQ(out.fhat[0], exact(mpq_class(1, 2)));
  EXPECT_EQ(out.fhat[1], exact(1));
  EXPECT_EQ(out.fhat[2], exact(0));
}

TEST(TaylorShift, ZeroStepTruncates) {
  CacState<ExactComplex> st{0, {exact(3), exact(1), exact(4), exact(1), exact(5)}};
  auto out = taylor_shift(st, exact(0), 2);
  ASSERT_EQ(out.fhat.size(), 3u);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(out.fhat[l], st.fhat[l]);
  EXPECT_THROW(taylor_shift(st, exact(0), 5), BudgetError);
}

TEST(TaylorShift, LogOneMinusHalfZ) {
  const mpfr_prec_t prec = 256;
  DerivativeSeries<FloatComplex> g = float_series({exact(1), exact(mpq_class(-1, 2))}, 41, prec);
  auto f = log_derivatives(to_convention(g, Convention::Derivative), 40);
  auto out = taylor_shift(CacState<FloatComplex>{0, f.values}, to_float(exact(mpq_class(1, 2)), prec), 0);
  EXPECT_NEAR(out.fhat[0].re.to_double(), std::log(0.75), 1e-6);
}

TEST(TaylorShift, CoefficientFormMatchesDerivativeForm) {
  std::mt19937_64 rng(71);
  std::vector<ExactComplex> c;
  for (int i = 0; i <= 10; ++i) c.push_back(testutil::random_complex(rng));
  ExactComplex d = testutil::random_complex(rng);
  auto shifted = taylor_shift_coefficients(c, d, 6);
  CacState<ExactComplex> st{0, detail::convert(c, Convention::Coefficient, Convention::Derivative)};
  auto viad = detail::convert(taylor_shift(st, d, 6).fhat, Convention::Derivative, Convention::Coefficient);
  EXPECT_EQ(shifted, viad);
}

// Polynomials of degree <= m_t are reproduced exactly along the path.
TEST(TaylorShift, PolynomialsShiftExactly) {
  std::mt19937_64 rng(72);
  std::vector<ExactComplex> coeffs;
  for (int i = 0; i <= 4; ++i) coeffs.push_back(testutil::random_complex(rng));
  CacSchedule s = hermitian_schedule(kDelta);
  CacState<ExactComplex> st{0, detail::convert(coeffs, Convention::Coefficient, Convention::Derivative)};
  for (std::size_t i = 1; i <= s.t(); ++i) st = taylor_shift(st, s.steps[i - 1], 4);
  ExactComplex direct = exact(0), zp = exact(1);
  for (const auto& c : coeffs) {
    direct += c * zp;
    zp *= s.points.back();
  }
  EXPECT_EQ(st.fhat[0], direct);
}

TEST(RunCac, EmptyScheduleReturnsZero) {
  CacSchedule s = schedule_from_points({exact(0)});
  CacBudget b = budget(16, 0.4, 0, BudgetMode::Practical);
  auto g = float_series({exact(1), exact(3)}, 17, 128);
  EXPECT_TRUE(run_cac(g, s, b).re.is_zero());
  EXPECT_THROW(run_cac(g, hermitian_schedule(kDelta), b), ParameterError);
}

TEST(RunCac, SingleSegmentToHalf) {
  CacSchedule s = schedule_from_points({exact(0), exact(1)});
  CacBudget b;
  b.m = {60, 0};
  auto g = float_series({exact(1), exact(mpq_class(-1, 2))}, 61, 256);
  EXPECT_NEAR(run_cac(g, s, b).re.to_double(), std::log(0.5), 1e-3);
}

// With a geometrically decaying budget the Hermitian path tracks the branch of
// log(1 - 5z/3) continuously (root at 3/5, eigenvalue -2/3).
TEST(RunCac, TracksBranchWithGeometricBudget) {
  const mpfr_prec_t prec = 600;
  auto full = hermitian_schedule(kDelta).points;
  CacSchedule s = schedule_from_points({full[0], full[1], full[2]});
  CacBudget b;
  b.m = {116, 24, 1};
  auto g = float_series({exact(1), exact(mpq_class(-5, 3))}, 117, prec);
  FloatComplex f = run_cac(g, s, b);
  std::complex<double> want = std::log(1.0 - (5.0 / 3.0) * to_cdouble(full[2]));
  EXPECT_NEAR(f.re.to_double(), want.real(), 1e-9);
  EXPECT_NEAR(f.im.to_double(), want.imag(), 1e-9);
}

TEST(RunCac, CircuitMatchesSeries) {
  const mpfr_prec_t prec = 256;
  CacSchedule s = hurwitz_schedule(kDelta);
  CacBudget b = budget(12, 0.4, s.t(), BudgetMode::Practical);
  std::mt19937_64 rng(73);
  std::vector<ExactComplex> gc{exact(1)};
  for (int i = 1; i <= 12; ++i) gc.push_back(exact(testutil::random_rational(rng, 3, 9)));
  auto g = float_series(gc, 13, prec);
  FloatComplex series = run_cac(g, s, b);
  Circuit c = cac_circuit(s, b);
  auto fco = log_coefficients_recurrence(gc, 12);
  std::vector<FloatComplex> x(c.num_vars(), to_float(exact(0), prec));
  for (std::size_t l = 0; l <= 12; ++l) x[l] = to_float(fco[l], prec);
  FloatComplex circ = evaluate(c, x);
  EXPECT_LT(abs(circ - series).to_double(), 1e-60);
}

// ---------------------------------------------------------------- inequalities

TEST(Inequalities, FactorialRatio) {
  InequalityCheck c = check_factorial_ratio(200, 200);
  EXPECT_EQ(c.checked, 40000u);
  EXPECT_EQ(c.violations, 0u);
  EXPECT_GE(c.worst_margin, 0);
}

TEST(Inequalities, PowerTail) {
  for (double beta : {1.1, std::exp(0.4), 2.0, std::exp(1.0)})
    for (unsigned long l = 1; l <= 20; l += 19) {
      InequalityCheck c = check_power_tail(beta, l, 100);
      EXPECT_EQ(c.violations, 0u) << beta << " " << l;
    }
}
