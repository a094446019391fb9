#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <unordered_map>
#include <vector>

#include "detshallow/circuit.hpp"

namespace detshallow {

// Multiplicative depth of a reduced circuit is asserted to stay below
// kDepthSlope * ceil(log2(d+1))^2 + kDepthOffset, d the free degree.
constexpr std::size_t kDepthSlope = 3;
constexpr std::size_t kDepthOffset = 4;

inline std::size_t ceil_log2(std::uint64_t x) {
  std::size_t k = 0;
  while ((std::uint64_t{1} << k) < x) ++k;
  return k;
}

inline std::size_t reduced_depth_bound(std::uint64_t degree) {
  std::size_t l = ceil_log2(degree + 1);
  return kDepthSlope * l * l + kDepthOffset;
}

namespace detail {

// Homogeneous DAG. Prod nodes keep their higher-degree child in `a`; Lin nodes
// are constant-coefficient combinations of nodes of equal degree.
struct HNode {
  enum Kind { Leaf, Prod, Lin } kind;
  std::uint32_t deg = 0;
  VarIndex var = 0;
  std::uint32_t a = 0, b = 0;
  std::vector<std::pair<ExactComplex, std::uint32_t>> terms;
};

class Homogenizer {
 public:
  std::vector<HNode> nodes;
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  // Components of the output: constant part and node ids for degrees 1..D.
  struct Parts {
    ExactComplex constant = exact(0);
    std::vector<std::uint32_t> comp;  // index i -> degree-i node or kNone (index 0 unused)
  };

  Parts run(const Circuit& c, std::uint64_t D) {
    auto live = c.cone();
    std::vector<Parts> parts(c.output() + 1);
    for (GateId g = 0; g <= c.output(); ++g) {
      if (!live[g]) continue;
      GateView v = c.gate(g);
      Parts& p = parts[g];
      p.comp.assign(D + 1, kNone);
      if (v.kind == GateKind::Input) {
        if (c.is_pinned(v.var)) {
          p.constant = *c.pins()[v.var];
        } else if (D >= 1) {
          p.comp[1] = leaf(v.var);
        }
      } else if (v.kind == GateKind::Add) {
        for (GateId ch : v.children) p.constant += parts[ch].constant;
        for (std::uint64_t i = 1; i <= D; ++i) {
          std::vector<std::pair<ExactComplex, std::uint32_t>> t;
          for (GateId ch : v.children)
            if (parts[ch].comp[i] != kNone) t.emplace_back(exact(1), parts[ch].comp[i]);
          p.comp[i] = lin(std::move(t), static_cast<std::uint32_t>(i));
        }
      } else {
        const Parts& x = parts[v.children[0]];
        const Parts& y = parts[v.children[1]];
        p.constant = x.constant * y.constant;
        for (std::uint64_t i = 1; i <= D; ++i) {
          std::vector<std::pair<ExactComplex, std::uint32_t>> t;
          if (!is_zero(x.constant) && y.comp[i] != kNone) t.emplace_back(x.constant, y.comp[i]);
          if (!is_zero(y.constant) && x.comp[i] != kNone) t.emplace_back(y.constant, x.comp[i]);
          for (std::uint64_t j = 1; j < i; ++j)
            if (x.comp[j] != kNone && y.comp[i - j] != kNone)
              t.emplace_back(exact(1), prod(x.comp[j], y.comp[i - j]));
          p.comp[i] = lin(std::move(t), static_cast<std::uint32_t>(i));
        }
      }
      // Children's tables are no longer needed once every parent is done;
      // keeping them is simpler and the memory is bounded by |C| (D+1).
    }
    return parts[c.output()];
  }

 private:
  std::unordered_map<VarIndex, std::uint32_t> leaf_of_;
  std::unordered_map<std::uint64_t, std::uint32_t> prod_of_;

  std::uint32_t push(HNode n) {
    nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }
  std::uint32_t leaf(VarIndex v) {
    auto it = leaf_of_.find(v);
    if (it != leaf_of_.end()) return it->second;
    HNode n;
    n.kind = HNode::Leaf;
    n.deg = 1;
    n.var = v;
    return leaf_of_[v] = push(std::move(n));
  }
  std::uint32_t prod(std::uint32_t a, std::uint32_t b) {
    if (nodes[a].deg < nodes[b].deg || (nodes[a].deg == nodes[b].deg && a > b)) std::swap(a, b);
    std::uint64_t key = (std::uint64_t{a} << 32) | b;
    auto it = prod_of_.find(key);
    if (it != prod_of_.end()) return it->second;
    HNode n;
    n.kind = HNode::Prod;
    n.deg = nodes[a].deg + nodes[b].deg;
    n.a = a;
    n.b = b;
    return prod_of_[key] = push(std::move(n));
  }
  std::uint32_t lin(std::vector<std::pair<ExactComplex, std::uint32_t>> t, std::uint32_t deg) {
    if (t.empty()) return kNone;
    if (t.size() == 1 && is_one(t[0].first)) return t[0].second;
    HNode n;
    n.kind = HNode::Lin;
    n.deg = deg;
    n.terms = std::move(t);
    return push(std::move(n));
  }
};

// A value in the reduced circuit: a constant or a gate, with its
// multiplicative depth.
struct RVal {
  bool is_const = true;
  ExactComplex c = exact(0);
  GateId g = 0;
  std::size_t depth = 0;
};

class Reducer {
 public:
  Reducer(const std::vector<HNode>& nodes, CircuitBuilder& b) : n_(nodes), b_(b), f_memo_(nodes.size()) {}

  RVal F(std::uint32_t u) {
    if (f_memo_[u]) return *f_memo_[u];
    const HNode& nu = n_[u];
    RVal out;
    if (nu.deg == 1) {
      std::vector<GateId> terms;
      bool scaled = false;
      for (const auto& [w, coef] : expand(u)) {
        GateId x = b_.input(n_[w].var);
        if (!is_one(coef)) scaled = true;
        terms.push_back(b_.scale(coef, x));
      }
      out = gate(b_.sum(terms), scaled ? 1 : 0);
    } else {
      std::uint32_t m = (nu.deg + 1) / 2;
      std::vector<RVal> terms;
      for (std::uint32_t t : frontier(u, m)) {
        auto q = Q(u, t);
        if (!q) continue;
        terms.push_back(product({F(n_[t].a), F(n_[t].b), *q}));
      }
      out = sum(terms);
    }
    f_memo_[u] = out;
    return out;
  }

  // Derivative of u with respect to the Prod node w, as a homogeneous
  // polynomial of degree deg u - deg w; nullopt when structurally zero.
  // Requires deg u < 2 deg w.
  std::optional<RVal> Q(std::uint32_t u, std::uint32_t w) {
    long D = static_cast<long>(n_[u].deg) - static_cast<long>(n_[w].deg);
    if (D < 0) return std::nullopt;
    std::uint64_t key = (std::uint64_t{u} << 32) | w;
    auto it = q_memo_.find(key);
    if (it != q_memo_.end()) return it->second;
    std::optional<RVal> out;
    if (D == 0) {
      const auto& e = expand(u);
      auto f = e.find(w);
      if (f != e.end()) out = constant(f->second);
    } else {
      std::uint32_t m = n_[w].deg + static_cast<std::uint32_t>(D / 2);
      std::vector<RVal> terms;
      for (std::uint32_t t : frontier(u, m)) {
        auto qa = Q(n_[t].a, w);
        if (!qa) continue;
        auto qu = Q(u, t);
        if (!qu) continue;
        terms.push_back(product({*qa, F(n_[t].b), *qu}));
      }
      if (!terms.empty()) out = sum(terms);
    }
    q_memo_[key] = out;
    return out;
  }

  RVal sum(const std::vector<RVal>& terms) {
    ExactComplex c = exact(0);
    std::vector<GateId> gates;
    std::size_t depth = 0;
    for (const auto& t : terms) {
      if (t.is_const) {
        c += t.c;
      } else {
        gates.push_back(t.g);
        depth = std::max(depth, t.depth);
      }
    }
    if (gates.empty()) return constant(c);
    if (!is_zero(c)) gates.push_back(b_.constant(c));
    return gate(b_.sum(gates), depth);
  }

  // Shallowest factors first; constants fold into one scaling.
  RVal product(std::vector<RVal> fs) {
    ExactComplex c = exact(1);
    std::vector<RVal> gs;
    for (auto& f : fs) {
      if (f.is_const)
        c *= f.c;
      else
        gs.push_back(f);
    }
    if (is_zero(c)) return constant(c);
    if (gs.empty()) return constant(c);
    while (gs.size() > 1) {
      std::sort(gs.begin(), gs.end(), [](const RVal& x, const RVal& y) { return x.depth > y.depth; });
      RVal x = gs.back();
      gs.pop_back();
      RVal y = gs.back();
      gs.pop_back();
      gs.push_back(gate(b_.mul(x.g, y.g), std::max(x.depth, y.depth) + 1));
    }
    RVal r = gs[0];
    if (!is_one(c)) r = gate(b_.scale(c, r.g), r.depth + 1);
    return r;
  }

  RVal constant(const ExactComplex& c) {
    RVal r;
    r.c = c;
    return r;
  }
  RVal gate(GateId g, std::size_t depth) {
    RVal r;
    r.is_const = false;
    r.g = g;
    r.depth = depth;
    return r;
  }

 private:
  const std::vector<HNode>& n_;
  CircuitBuilder& b_;
  std::vector<std::optional<RVal>> f_memo_;
  std::unordered_map<std::uint64_t, std::optional<RVal>> q_memo_;
  std::unordered_map<std::uint32_t, std::map<std::uint32_t, ExactComplex>> expand_memo_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> frontier_memo_;

  // u as a combination of non-Lin nodes of the same degree.
  const std::map<std::uint32_t, ExactComplex>& expand(std::uint32_t u) {
    auto it = expand_memo_.find(u);
    if (it != expand_memo_.end()) return it->second;
    std::map<std::uint32_t, ExactComplex> out;
    if (n_[u].kind != HNode::Lin) {
      out[u] = exact(1);
    } else {
      for (const auto& [coef, ch] : n_[u].terms)
        for (const auto& [w, c2] : expand(ch)) {
          auto [pos, fresh] = out.try_emplace(w, coef * c2);
          if (!fresh) pos->second += coef * c2;
        }
      std::erase_if(out, [](const auto& kv) { return is_zero(kv.second); });
    }
    return expand_memo_[u] = std::move(out);
  }

  // Prod nodes t below u with deg t > m and deg a_t <= m, reached through Lin
  // nodes and the higher-degree side of products.
  const std::vector<std::uint32_t>& frontier(std::uint32_t u, std::uint32_t m) {
    auto key = std::make_pair(u, m);
    auto it = frontier_memo_.find(key);
    if (it != frontier_memo_.end()) return it->second;
    std::vector<std::uint32_t> out;
    const HNode& nu = n_[u];
    if (nu.deg > m) {
      if (nu.kind == HNode::Prod) {
        if (n_[nu.a].deg <= m)
          out.push_back(u);
        else
          out = frontier(nu.a, m);
      } else if (nu.kind == HNode::Lin) {
        for (const auto& [coef, ch] : nu.terms) {
          const auto& f = frontier(ch, m);
          out.insert(out.end(), f.begin(), f.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
      }
    }
    return frontier_memo_[key] = std::move(out);
  }
};

}  // namespace detail

// Equivalent circuit of multiplicative depth O(log^2 d) with wide additions:
// homogenize (constants and pins fold into degree 0), then rebuild every
// homogeneous component by degree halving over product frontiers.
inline Circuit depth_reduce(const Circuit& c) {
  std::uint64_t D = c.free_degree();
  CircuitBuilder b = CircuitBuilder::like(c, true);
  if (c.gate(c.output()).kind == GateKind::Input) return b.finish(b.input(c.gate(c.output()).var));
  detail::Homogenizer h;
  auto parts = h.run(c, D);
  detail::Reducer r(h.nodes, b);
  std::vector<detail::RVal> terms{r.constant(parts.constant)};
  for (std::uint64_t i = 1; i <= D; ++i)
    if (parts.comp[i] != detail::Homogenizer::kNone) terms.push_back(r.F(parts.comp[i]));
  detail::RVal out = r.sum(terms);
  GateId g = out.is_const ? b.constant(out.c) : out.g;
  Circuit res = b.finish(g);
  if (res.multiplicative_depth() > reduced_depth_bound(D))
    throw Error("depth reduction exceeded its depth bound");
  if (res.free_degree() > D) throw Error("depth reduction raised the degree");
  return res;
}

// Fan-in-2 copy: every wide addition becomes a balanced binary tree.
inline Circuit binarize_adds(const Circuit& c) {
  CircuitBuilder nb(c.num_vars(), false);
  for (VarIndex v = 0; v < c.num_vars(); ++v)
    if (c.is_pinned(v)) nb.pin(v, *c.pins()[v]);
  auto live = c.cone();
  std::vector<GateId> map(c.output() + 1);
  for (GateId g = 0; g <= c.output(); ++g) {
    if (!live[g]) continue;
    GateView v = c.gate(g);
    if (v.kind == GateKind::Input) {
      map[g] = nb.input(v.var);
    } else {
      std::vector<GateId> ch;
      for (GateId x : v.children) ch.push_back(map[x]);
      map[g] = v.kind == GateKind::Add ? nb.sum(ch) : nb.mul(ch[0], ch[1]);
    }
  }
  return nb.finish(map[c.output()]);
}

// ---------------------------------------------------------------------------
// Randomized identity testing.

struct IdentityTestResult {
  std::size_t points = 0;
  std::size_t mismatches = 0;
  // Schwartz-Zippel bound on the chance that unequal polynomials agree on all points.
  double false_agreement = 0;
};

// Free variables take independent random Gaussian integers with parts in
// [-range, range]; pins keep their values. Exact rational arithmetic.
inline IdentityTestResult identity_test(const Circuit& x, const Circuit& y, std::size_t points, std::uint64_t seed,
                                        long range = 1000) {
  if (x.free_vars() != y.free_vars()) throw ArityError("circuits disagree on their free variables");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> dist(-range, range);
  IdentityTestResult r;
  r.points = points;
  std::uint64_t d = std::max(x.free_degree(), y.free_degree());
  r.false_agreement = std::pow(static_cast<double>(d) / static_cast<double>(2 * range + 1), static_cast<double>(points));
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<ExactComplex> ax(x.num_vars(), exact(0)), ay(y.num_vars(), exact(0));
    for (VarIndex v : x.free_vars()) {
      ExactComplex val = exact(dist(rng), dist(rng));
      ax[v] = val;
      ay[v] = val;
    }
    if (!(evaluate(x, ax) == evaluate(y, ay))) ++r.mismatches;
  }
  return r;
}

// Same test over F_p[i] with p = 2^61 - 1 (i^2 = -1 has no root mod p since
// p = 3 mod 4), for circuits too large for rational evaluation.
inline IdentityTestResult identity_test_mod(const Circuit& x, const Circuit& y, std::size_t points, std::uint64_t seed) {
  if (x.free_vars() != y.free_vars()) throw ArityError("circuits disagree on their free variables");
  std::mt19937_64 rng(seed);
  IdentityTestResult r;
  r.points = points;
  std::uint64_t d = std::max(x.free_degree(), y.free_degree());
  double field = std::ldexp(1.0, 122);
  r.false_agreement = std::pow(static_cast<double>(d) / field, static_cast<double>(points));
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<ModComplex> ax(x.num_vars()), ay(y.num_vars());
    for (VarIndex v : x.free_vars()) {
      ModComplex val(ModP::from_signed(static_cast<long long>(rng() % ModP::kP)),
                     ModP::from_signed(static_cast<long long>(rng() % ModP::kP)));
      ax[v] = val;
      ay[v] = val;
    }
    if (!(evaluate(x, ax) == evaluate(y, ay))) ++r.mismatches;
  }
  return r;
}

}  // namespace detshallow
