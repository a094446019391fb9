#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace detshallow;
using testutil::random_assignment;

namespace {

Circuit chain_product(std::size_t k) {
  CircuitBuilder b(k);
  GateId acc = b.input(0);
  for (VarIndex v = 1; v < k; ++v) acc = b.mul(acc, b.input(v));
  return b.finish(acc);
}

Circuit random_small_circuit(std::mt19937_64& rng, std::size_t vars, std::size_t gates) {
  return testutil::random_circuit(rng, vars, gates);
}

}  // namespace

TEST(Evaluate, ProductPlusInput) {
  CircuitBuilder b(3);
  Circuit c = b.finish(b.add(b.mul(b.input(0), b.input(1)), b.input(2)));
  EXPECT_EQ(evaluate(c, std::vector<ExactComplex>{exact(2), exact(3), exact(4)}), exact(10));
}

TEST(Evaluate, ZeroAssignmentOfProduct) {
  Circuit c = chain_product(5);
  EXPECT_EQ(evaluate(c, std::vector<ExactComplex>(5, exact(0))), exact(0));
}

TEST(Evaluate, ArityAndModeErrors) {
  Circuit c = chain_product(2);
  EXPECT_THROW(evaluate(c, std::vector<ExactComplex>{exact(1)}), ArityError);
  std::vector<ComplexScalar> mixed{ComplexScalar(exact(1)), ComplexScalar(to_float(exact(1), 64))};
  EXPECT_THROW(evaluate(c, mixed), ModeError);
  std::vector<ComplexScalar> ok{ComplexScalar(exact(2)), ComplexScalar(exact(5))};
  EXPECT_EQ(std::get<ExactComplex>(evaluate(c, ok)), exact(10));
}

TEST(Evaluate, PinsOverrideAssignment) {
  CircuitBuilder b(1);
  GateId k = b.constant(exact(7));
  Circuit c = b.finish(b.add(b.input(0), k));
  std::vector<ExactComplex> x(c.num_vars(), exact(100));
  x[0] = exact(1);
  EXPECT_EQ(evaluate(c, x), exact(8));
}

TEST(Evaluate, BerkowitzMatchesCofactorOn3x3) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    ExactMatrix a = testutil::random_matrix(3, rng);
    InterpolationPolynomialSpec spec{3, SignMode::Plain, Construction::Direct};
    Circuit c = samuelson_berkowitz_circuit(spec);
    auto x = interpolation_assignment(c, spec, a, exact(1));
    EXPECT_EQ(evaluate(c, x), testutil::cofactor_det(a));
  }
}

TEST(Evaluate, DeterministicFloat) {
  std::mt19937_64 rng(3);
  Circuit c = random_small_circuit(rng, 4, 30);
  std::vector<FloatComplex> x;
  for (std::size_t i = 0; i < c.num_vars(); ++i) x.push_back(to_float(testutil::random_complex(rng), 200));
  FloatComplex a = evaluate(c, x), b = evaluate(c, x);
  EXPECT_TRUE(a.re == b.re && a.im == b.im);
}

TEST(Metrics, SingleInput) {
  CircuitBuilder b(1);
  Circuit c = b.finish(b.input(0));
  EXPECT_EQ(c.metrics(), (Metrics{1, 0, 1}));
}

TEST(Metrics, BalancedProductTree) {
  CircuitBuilder b(8);
  std::vector<GateId> xs;
  for (VarIndex v = 0; v < 8; ++v) xs.push_back(b.input(v));
  Circuit c = b.finish(b.product(xs));
  EXPECT_EQ(c.metrics(), (Metrics{15, 3, 8}));
}

TEST(Metrics, LeftChain) {
  Metrics m = chain_product(8).metrics();
  EXPECT_EQ(m.depth, 7u);
  EXPECT_EQ(m.formal_degree, 8u);
}

TEST(Structure, TopologicalOrderAndFanIn) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Circuit c = random_small_circuit(rng, 3, 25);
    for (GateId g = 0; g <= c.output(); ++g) {
      GateView v = c.gate(g);
      for (GateId ch : v.children) EXPECT_LT(ch, g);
      if (v.kind == GateKind::Mul) {
        EXPECT_EQ(v.children.size(), 2u);
      }
      if (v.kind == GateKind::Add) {
        EXPECT_TRUE(v.children.size() >= 1 && v.children.size() <= 2);
      }
    }
    EXPECT_TRUE(c.no_constant_inputs());
  }
}

TEST(Compose, SquarePlusPinnedOne) {
  CircuitBuilder ob(2);
  Circuit outer = ob.finish(ob.add(ob.input(0), ob.input(1)));
  CircuitBuilder ib(1);
  Circuit sq = ib.finish(ib.mul(ib.input(0), ib.input(0)));
  CircuitBuilder ob2(1);
  Circuit one = ob2.finish(ob2.one());
  Circuit c = compose(outer, {sq, one});
  for (long x = -3; x <= 3; ++x) {
    std::vector<ExactComplex> a(c.num_vars(), exact(0));
    a[0] = exact(x);
    EXPECT_EQ(evaluate(c, a), exact(x * x + 1));
  }
}

TEST(Compose, IdentityOuterKeepsInner) {
  std::mt19937_64 rng(7);
  Circuit inner = random_small_circuit(rng, 3, 10);
  CircuitBuilder ob(1);
  Circuit outer = ob.finish(ob.input(0));
  Circuit c = compose(outer, {inner});
  EXPECT_EQ(c.metrics(), inner.metrics());
  auto x = random_assignment(inner, rng);
  std::vector<ExactComplex> cx(c.num_vars(), exact(0));
  for (VarIndex v : inner.free_vars()) cx[v] = x[v];
  EXPECT_EQ(evaluate(c, cx), evaluate(inner, x));
}

TEST(Compose, MatchesSubstitutionAndDepth) {
  std::mt19937_64 rng(9);
  Circuit outer = random_small_circuit(rng, 3, 12);
  std::vector<Circuit> inner;
  for (std::size_t i = 0; i < outer.num_vars(); ++i) inner.push_back(random_small_circuit(rng, 2, 8));
  Circuit c = compose(outer, inner);
  std::size_t inner_depth = 0, inner_size = 0;
  for (const auto& g : inner) {
    inner_depth = std::max(inner_depth, g.metrics().depth);
    inner_size += g.size();
  }
  EXPECT_LE(c.metrics().depth, outer.metrics().depth + inner_depth);
  EXPECT_LE(c.size(), outer.size() + inner_size);
  for (int p = 0; p < 20; ++p) {
    std::vector<ExactComplex> x(c.num_vars(), exact(0));
    for (VarIndex v : c.free_vars()) x[v] = testutil::random_complex(rng);
    std::vector<ExactComplex> ox(outer.num_vars(), exact(0));
    for (std::size_t i = 0; i < outer.num_vars(); ++i) {
      std::vector<ExactComplex> ix(inner[i].num_vars(), exact(0));
      for (VarIndex v : inner[i].free_vars()) ix[v] = x[v];
      ox[i] = evaluate(inner[i], ix);
    }
    EXPECT_EQ(evaluate(c, x), evaluate(outer, ox));
  }
}

TEST(Compose, ArityMismatch) {
  Circuit outer = chain_product(2);
  EXPECT_THROW(compose(outer, {chain_product(1)}), ArityError);
}

// Univariate restriction x_i = a_i + b_i s, then interpolation in s: the
// recovered degree never exceeds the formal degree.
TEST(Degree, FormalDegreeBoundsTrueDegree) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    Circuit c = random_small_circuit(rng, 2, 6 + t % 5);
    std::uint64_t d = c.metrics().formal_degree;
    if (d > 40) continue;
    auto base = random_assignment(c, rng), dir = random_assignment(c, rng);
    std::vector<ExactComplex> ys;
    for (std::uint64_t s = 0; s <= d + 1; ++s) {
      std::vector<ExactComplex> x = base;
      for (VarIndex v : c.free_vars()) x[v] = base[v] + dir[v].scaled(mpq_class(static_cast<long>(s)));
      ys.push_back(evaluate(c, x));
    }
    // The (d+1)-th finite difference vanishes for a polynomial of degree <= d.
    for (std::uint64_t level = 0; level <= d; ++level)
      for (std::size_t i = 0; i + 1 < ys.size() - level; ++i) ys[i] = ys[i + 1] - ys[i];
    EXPECT_TRUE(is_zero(ys[0])) << "trial " << t;
  }
}

TEST(TextFormat, RoundTrip) {
  std::mt19937_64 rng(13);
  Circuit c = random_small_circuit(rng, 3, 20);
  std::stringstream ss;
  write_circuit(ss, c);
  Circuit d = read_circuit(ss);
  auto x = random_assignment(c, rng);
  EXPECT_EQ(evaluate(c, x), evaluate(d, x));
  EXPECT_EQ(c.metrics(), d.metrics());
}
