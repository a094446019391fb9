#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "detshallow/errors.hpp"
#include "detshallow/numeric.hpp"

namespace detshallow {

using GateId = std::uint32_t;
using VarIndex = std::uint32_t;

enum class GateKind : std::uint8_t { Input, Add, Mul };

struct GateView {
  GateKind kind;
  VarIndex var;  // meaningful for Input only
  std::span<const GateId> children;
};

struct Metrics {
  std::size_t size = 0;
  std::size_t depth = 0;
  std::uint64_t formal_degree = 0;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

namespace detail {
inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}
}  // namespace detail

// Append-only gate storage shared by every view onto it.
class GateStore {
 public:
  std::size_t gate_count() const { return kind_.size(); }
  GateView gate(GateId g) const {
    GateView v{kind_[g], 0, {}};
    if (kind_[g] == GateKind::Input)
      v.var = arg_[g];
    else
      v.children = std::span<const GateId>(children_.data() + arg_[g], count_[g]);
    return v;
  }
  std::size_t num_vars() const { return pins_.size(); }
  const std::optional<ExactComplex>& pin(VarIndex v) const { return pins_[v]; }
  const std::vector<std::optional<ExactComplex>>& pins() const { return pins_; }
  bool wide_add() const { return wide_add_; }

 private:
  friend class CircuitBuilder;
  friend class Circuit;
  std::vector<GateKind> kind_;
  std::vector<std::uint32_t> arg_;
  std::vector<std::uint32_t> count_;
  std::vector<GateId> children_;
  std::vector<std::optional<ExactComplex>> pins_;
  bool wide_add_ = false;
};

// An immutable circuit: a view of a gate store with a designated output.
// Every metric is computed over the cone of the output gate.
class Circuit {
 public:
  Circuit() = default;
  Circuit(std::shared_ptr<const GateStore> store, GateId output) : store_(std::move(store)), output_(output) {
    if (output_ >= store_->gate_count()) throw ArityError("output gate out of range");
  }

  const GateStore& store() const { return *store_; }
  const std::shared_ptr<const GateStore>& store_ptr() const { return store_; }
  GateId output() const { return output_; }
  GateView gate(GateId g) const { return store_->gate(g); }
  std::size_t num_vars() const { return store_->num_vars(); }
  const std::vector<std::optional<ExactComplex>>& pins() const { return store_->pins(); }
  bool is_pinned(VarIndex v) const { return store_->pin(v).has_value(); }
  bool wide_add() const { return store_->wide_add(); }
  // Always true: the IR has no constant gate kind; constants are pinned variables.
  bool no_constant_inputs() const { return true; }

  std::vector<VarIndex> free_vars() const {
    std::vector<VarIndex> out;
    for (VarIndex v = 0; v < num_vars(); ++v)
      if (!is_pinned(v)) out.push_back(v);
    return out;
  }

  // Marks gates reachable from the output.
  std::vector<char> cone() const {
    std::vector<char> live(output_ + 1, 0);
    live[output_] = 1;
    for (GateId g = output_ + 1; g-- > 0;) {
      if (!live[g]) continue;
      for (GateId c : gate(g).children) live[c] = 1;
    }
    return live;
  }

  std::size_t size() const {
    auto live = cone();
    return static_cast<std::size_t>(std::count(live.begin(), live.end(), 1));
  }

  Metrics metrics() const {
    auto live = cone();
    std::vector<std::size_t> depth(output_ + 1, 0);
    std::vector<std::uint64_t> deg(output_ + 1, 0);
    Metrics m;
    for (GateId g = 0; g <= output_; ++g) {
      if (!live[g]) continue;
      ++m.size;
      GateView v = gate(g);
      if (v.kind == GateKind::Input) {
        deg[g] = 1;
        continue;
      }
      std::size_t d = 0;
      std::uint64_t fd = 0;
      for (GateId c : v.children) {
        d = std::max(d, depth[c] + 1);
        fd = v.kind == GateKind::Add ? std::max(fd, deg[c]) : detail::sat_add(fd, deg[c]);
      }
      depth[g] = d;
      deg[g] = fd;
    }
    m.depth = depth[output_];
    m.formal_degree = deg[output_];
    return m;
  }
  std::size_t depth() const { return metrics().depth; }
  std::uint64_t formal_degree() const { return metrics().formal_degree; }

  // Per-gate formal degree where pinned variables count as degree 0, i.e. the
  // degree in the free variables only.
  std::vector<std::uint64_t> free_degrees() const {
    std::vector<std::uint64_t> deg(output_ + 1, 0);
    auto live = cone();
    for (GateId g = 0; g <= output_; ++g) {
      if (!live[g]) continue;
      GateView v = gate(g);
      if (v.kind == GateKind::Input) {
        deg[g] = is_pinned(v.var) ? 0 : 1;
        continue;
      }
      std::uint64_t fd = 0;
      for (GateId c : v.children)
        fd = v.kind == GateKind::Add ? std::max(fd, deg[c]) : detail::sat_add(fd, deg[c]);
      deg[g] = fd;
    }
    return deg;
  }
  std::uint64_t free_degree() const { return free_degrees()[output_]; }

  std::size_t multiplicative_depth() const {
    auto live = cone();
    std::vector<std::size_t> md(output_ + 1, 0);
    for (GateId g = 0; g <= output_; ++g) {
      if (!live[g]) continue;
      GateView v = gate(g);
      std::size_t d = 0;
      for (GateId c : v.children) d = std::max(d, md[c]);
      md[g] = d + (v.kind == GateKind::Mul ? 1 : 0);
    }
    return md[output_];
  }

  std::size_t max_add_fanin() const {
    auto live = cone();
    std::size_t m = 0;
    for (GateId g = 0; g <= output_; ++g)
      if (live[g] && gate(g).kind == GateKind::Add) m = std::max(m, gate(g).children.size());
    return m;
  }

  Circuit with_output(GateId g) const { return Circuit(store_, g); }

 private:
  std::shared_ptr<const GateStore> store_;
  GateId output_ = 0;
};

// Several outputs over one shared DAG.
struct MultiCircuit {
  std::shared_ptr<const GateStore> store;
  std::vector<GateId> outputs;

  std::size_t size() const { return store->gate_count(); }
  Circuit view(std::size_t i) const { return Circuit(store, outputs.at(i)); }
  std::vector<Circuit> views() const {
    std::vector<Circuit> out;
    for (std::size_t i = 0; i < outputs.size(); ++i) out.push_back(view(i));
    return out;
  }
};

// ---------------------------------------------------------------------------

class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::size_t num_vars = 0, bool wide_add = false) {
    store_ = std::make_shared<GateStore>();
    store_->pins_.resize(num_vars);
    store_->wide_add_ = wide_add;
    input_of_var_.assign(num_vars, kNone);
  }

  // Builder over the same variable space (and pins) as `c`.
  static CircuitBuilder like(const Circuit& c, bool wide_add = false) {
    CircuitBuilder b(c.num_vars(), wide_add || c.wide_add());
    for (VarIndex v = 0; v < c.num_vars(); ++v)
      if (c.is_pinned(v)) b.pin(v, *c.pins()[v]);
    return b;
  }
  static CircuitBuilder like(const GateStore& s, bool wide_add = false) {
    CircuitBuilder b(s.num_vars(), wide_add || s.wide_add());
    for (VarIndex v = 0; v < s.num_vars(); ++v)
      if (s.pin(v)) b.pin(v, *s.pin(v));
    return b;
  }

  std::size_t num_vars() const { return store_->pins_.size(); }
  std::size_t gate_count() const { return store_->gate_count(); }
  GateView gate(GateId g) const { return store_->gate(g); }

  VarIndex new_var() {
    store_->pins_.emplace_back();
    input_of_var_.push_back(kNone);
    return static_cast<VarIndex>(store_->pins_.size() - 1);
  }
  void pin(VarIndex v, const ExactComplex& value) {
    if (v >= num_vars()) throw ArityError("pin of unknown variable");
    if (store_->pins_[v] && !(*store_->pins_[v] == value)) throw ArityError("conflicting pins for one variable");
    store_->pins_[v] = value;
    if (!pin_index_.count(key_of(value))) pin_index_[key_of(value)] = v;
  }
  // A pinned variable holding `value`, shared across calls.
  VarIndex constant_var(const ExactComplex& value) {
    auto key = key_of(value);
    auto it = pin_index_.find(key);
    if (it != pin_index_.end()) return it->second;
    VarIndex v = new_var();
    store_->pins_[v] = value;
    pin_index_[key] = v;
    return v;
  }

  GateId input(VarIndex v) {
    if (v >= num_vars()) throw ArityError("input references unknown variable");
    if (input_of_var_[v] != kNone) return input_of_var_[v];
    GateId g = push(GateKind::Input, v, {});
    input_of_var_[v] = g;
    if (store_->pins_[v]) {
      if (is_zero(*store_->pins_[v])) zero_gates_.push_back(g);
      if (is_one(*store_->pins_[v])) one_gates_.push_back(g);
    }
    return g;
  }
  GateId constant(const ExactComplex& value) { return input(constant_var(value)); }
  GateId zero() { return constant(exact(0)); }
  GateId one() { return constant(exact(1)); }

  bool is_zero_gate(GateId g) const { return contains(zero_gates_, g); }
  bool is_one_gate(GateId g) const { return contains(one_gates_, g); }
  std::optional<ExactComplex> constant_value(GateId g) const {
    GateView v = gate(g);
    if (v.kind != GateKind::Input) return std::nullopt;
    return store_->pins_[v.var];
  }

  GateId mul(GateId a, GateId b) {
    check(a);
    check(b);
    if (is_zero_gate(a)) return a;
    if (is_zero_gate(b)) return b;
    if (is_one_gate(a)) return b;
    if (is_one_gate(b)) return a;
    if (a > b) std::swap(a, b);
    return hashed(GateKind::Mul, a, b);
  }
  GateId add(GateId a, GateId b) {
    check(a);
    check(b);
    if (is_zero_gate(a)) return b;
    if (is_zero_gate(b)) return a;
    if (a > b) std::swap(a, b);
    return hashed(GateKind::Add, a, b);
  }
  // Sum of arbitrarily many terms: one wide gate if the builder allows it,
  // otherwise a balanced binary tree.
  GateId sum(std::vector<GateId> terms) {
    std::erase_if(terms, [&](GateId g) { return is_zero_gate(g); });
    if (terms.empty()) return zero();
    if (terms.size() == 1) return terms[0];
    if (store_->wide_add_ && terms.size() > 2) {
      for (GateId t : terms) check(t);
      std::sort(terms.begin(), terms.end());
      return push(GateKind::Add, 0, terms);
    }
    return balanced(terms, 0, terms.size(), true);
  }
  GateId product(std::vector<GateId> factors) {
    if (factors.empty()) return one();
    return balanced(factors, 0, factors.size(), false);
  }
  GateId scale(const ExactComplex& c, GateId g) {
    if (is_zero(c)) return zero();
    if (is_one(c)) return g;
    return mul(constant(c), g);
  }
  GateId neg(GateId g) { return scale(exact(-1), g); }
  GateId sub(GateId a, GateId b) { return add(a, neg(b)); }

  // Copies the cone of `c` into this builder. `var_map[v]` gives the gate that
  // replaces variable v (nullopt keeps the variable itself, carrying its pin).
  GateId import(const Circuit& c, const std::vector<std::optional<GateId>>& var_map) {
    auto& memo = import_memo_[{c.store_ptr().get(), map_id(var_map)}];
    auto live = c.cone();
    memo.resize(std::max<std::size_t>(memo.size(), c.output() + 1), kNone);
    for (GateId g = 0; g <= c.output(); ++g) {
      if (!live[g] || memo[g] != kNone) continue;
      GateView v = c.gate(g);
      GateId out;
      if (v.kind == GateKind::Input) {
        if (v.var < var_map.size() && var_map[v.var]) {
          out = *var_map[v.var];
        } else if (c.is_pinned(v.var)) {
          const ExactComplex& val = *c.store().pin(v.var);
          bool same = v.var < num_vars() && store_->pins_[v.var] && *store_->pins_[v.var] == val;
          out = same ? input(v.var) : constant(val);
        } else {
          if (v.var >= num_vars()) throw ArityError("imported circuit uses a variable outside the target space");
          out = input(v.var);
        }
      } else if (v.kind == GateKind::Mul) {
        out = mul(memo[v.children[0]], memo[v.children[1]]);
      } else {
        std::vector<GateId> ch;
        for (GateId x : v.children) ch.push_back(memo[x]);
        out = ch.size() == 2 ? add(ch[0], ch[1]) : sum(ch);
      }
      memo[g] = out;
    }
    return memo[c.output()];
  }
  GateId import(const Circuit& c) { return import(c, {}); }

  Circuit finish(GateId output) {
    auto multi = finish_multi({output});
    return multi.view(0);
  }

  // Produces a pruned store containing only gates reachable from `outputs`.
  MultiCircuit finish_multi(const std::vector<GateId>& outputs) {
    const GateStore& s = *store_;
    std::vector<char> live(s.gate_count(), 0);
    for (GateId o : outputs) {
      check(o);
      live[o] = 1;
    }
    for (GateId g = static_cast<GateId>(s.gate_count()); g-- > 0;) {
      if (!live[g]) continue;
      for (GateId c : s.gate(g).children) live[c] = 1;
    }
    auto out = std::make_shared<GateStore>();
    out->pins_ = s.pins_;
    out->wide_add_ = s.wide_add_;
    std::vector<GateId> remap(s.gate_count(), kNone);
    for (GateId g = 0; g < s.gate_count(); ++g) {
      if (!live[g]) continue;
      remap[g] = static_cast<GateId>(out->kind_.size());
      out->kind_.push_back(s.kind_[g]);
      if (s.kind_[g] == GateKind::Input) {
        out->arg_.push_back(s.arg_[g]);
        out->count_.push_back(0);
      } else {
        out->arg_.push_back(static_cast<std::uint32_t>(out->children_.size()));
        out->count_.push_back(s.count_[g]);
        for (GateId c : s.gate(g).children) out->children_.push_back(remap[c]);
      }
    }
    MultiCircuit mc;
    mc.store = out;
    for (GateId o : outputs) mc.outputs.push_back(remap[o]);
    return mc;
  }

  // Raw append without hashing or simplification (used by the parser, which
  // must reproduce gate numbering exactly).
  GateId raw_gate(GateKind kind, VarIndex var, const std::vector<GateId>& children) {
    for (GateId c : children) check(c);
    if (kind == GateKind::Input) {
      if (var >= num_vars()) throw ArityError("input references unknown variable");
      return push(kind, var, {});
    }
    if (kind == GateKind::Mul && children.size() != 2) throw ArityError("mul gate needs exactly two children");
    if (kind == GateKind::Add && children.empty()) throw ArityError("add gate needs at least one child");
    if (kind == GateKind::Add && children.size() > 2) store_->wide_add_ = true;
    return push(kind, 0, children);
  }

 private:
  static constexpr GateId kNone = std::numeric_limits<GateId>::max();

  static bool contains(const std::vector<GateId>& v, GateId g) { return std::find(v.begin(), v.end(), g) != v.end(); }
  static std::string key_of(const ExactComplex& z) { return z.re.get_str() + "," + z.im.get_str(); }

  void check(GateId g) const {
    if (g >= store_->gate_count()) throw ArityError("child gate id out of range");
  }

  GateId push(GateKind kind, VarIndex var, const std::vector<GateId>& children) {
    GateStore& s = *store_;
    GateId id = static_cast<GateId>(s.kind_.size());
    s.kind_.push_back(kind);
    if (kind == GateKind::Input) {
      s.arg_.push_back(var);
      s.count_.push_back(0);
    } else {
      s.arg_.push_back(static_cast<std::uint32_t>(s.children_.size()));
      s.count_.push_back(static_cast<std::uint32_t>(children.size()));
      s.children_.insert(s.children_.end(), children.begin(), children.end());
    }
    return id;
  }

  GateId hashed(GateKind kind, GateId a, GateId b) {
    std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    auto& table = kind == GateKind::Mul ? mul_table_ : add_table_;
    auto it = table.find(key);
    if (it != table.end()) return it->second;
    GateId g = push(kind, 0, {a, b});
    table.emplace(key, g);
    return g;
  }

  GateId balanced(const std::vector<GateId>& xs, std::size_t lo, std::size_t hi, bool is_add) {
    if (hi - lo == 1) return xs[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    GateId l = balanced(xs, lo, mid, is_add);
    GateId r = balanced(xs, mid, hi, is_add);
    return is_add ? add(l, r) : mul(l, r);
  }

  std::size_t map_id(const std::vector<std::optional<GateId>>& var_map) {
    std::string key;
    for (const auto& m : var_map) key += m ? std::to_string(*m) + "," : "_,";
    auto it = map_ids_.find(key);
    if (it != map_ids_.end()) return it->second;
    std::size_t id = map_ids_.size();
    map_ids_.emplace(std::move(key), id);
    return id;
  }

  struct MemoKeyHash {
    std::size_t operator()(const std::pair<const GateStore*, std::size_t>& k) const {
      return std::hash<const void*>()(k.first) ^ (k.second * 0x9e3779b97f4a7c15ULL);
    }
  };

  std::shared_ptr<GateStore> store_;
  std::vector<GateId> input_of_var_;
  std::vector<GateId> zero_gates_, one_gates_;
  std::unordered_map<std::string, VarIndex> pin_index_;
  std::unordered_map<std::uint64_t, GateId> mul_table_, add_table_;
  std::unordered_map<std::string, std::size_t> map_ids_;
  std::unordered_map<std::pair<const GateStore*, std::size_t>, std::vector<GateId>, MemoKeyHash> import_memo_;
};

// ---------------------------------------------------------------------------
// Evaluation.

// Values of every gate in the store (gates past `limit` are skipped).
template <class T>
std::vector<T> evaluate_gates(const GateStore& s, const std::vector<T>& assignment, std::size_t limit,
                              const std::vector<char>* live = nullptr, bool use_pins = true) {
  if (assignment.size() != s.num_vars())
    throw ArityError("assignment length " + std::to_string(assignment.size()) + " != num_vars " +
                     std::to_string(s.num_vars()));
  const T* like_ptr = assignment.empty() ? nullptr : &assignment.front();
  T like = like_ptr ? *like_ptr : T{};
  std::vector<T> val(limit);
  std::vector<std::optional<T>> pin_cache(s.num_vars());
  for (GateId g = 0; g < limit; ++g) {
    if (live && !(*live)[g]) continue;
    GateView v = s.gate(g);
    switch (v.kind) {
      case GateKind::Input:
        if (use_pins && s.pin(v.var)) {
          if (!pin_cache[v.var]) pin_cache[v.var] = ScalarOps<T>::from_exact(*s.pin(v.var), like);
          val[g] = *pin_cache[v.var];
        } else {
          val[g] = assignment[v.var];
        }
        break;
      case GateKind::Add: {
        T acc = val[v.children[0]];
        for (std::size_t i = 1; i < v.children.size(); ++i) acc += val[v.children[i]];
        val[g] = std::move(acc);
        break;
      }
      case GateKind::Mul:
        val[g] = val[v.children[0]] * val[v.children[1]];
        break;
    }
  }
  return val;
}

template <class T>
T evaluate(const Circuit& c, const std::vector<T>& assignment) {
  auto live = c.cone();
  auto val = evaluate_gates(c.store(), assignment, c.output() + 1, &live);
  return val[c.output()];
}

// Every variable, pinned or not, is read from `assignment`.
template <class T>
T evaluate_unpinned(const Circuit& c, const std::vector<T>& assignment) {
  auto live = c.cone();
  return evaluate_gates(c.store(), assignment, c.output() + 1, &live, false)[c.output()];
}

template <class T>
std::vector<T> evaluate(const MultiCircuit& mc, const std::vector<T>& assignment) {
  auto val = evaluate_gates(*mc.store, assignment, mc.store->gate_count());
  std::vector<T> out;
  for (GateId o : mc.outputs) out.push_back(val[o]);
  return out;
}

// Runtime-typed entry point: every entry must use the same arithmetic mode.
inline ComplexScalar evaluate(const Circuit& c, const std::vector<ComplexScalar>& assignment) {
  if (assignment.size() != c.num_vars())
    throw ArityError("assignment length " + std::to_string(assignment.size()) + " != num_vars " +
                     std::to_string(c.num_vars()));
  if (assignment.empty()) return evaluate(c, std::vector<ExactComplex>{});
  std::size_t mode = assignment.front().index();
  for (const auto& a : assignment)
    if (a.index() != mode) throw ModeError("mixed arithmetic modes in assignment");
  if (mode == 0) {
    std::vector<ExactComplex> xs;
    for (const auto& a : assignment) xs.push_back(std::get<0>(a));
    return evaluate(c, xs);
  }
  std::vector<FloatComplex> xs;
  for (const auto& a : assignment) xs.push_back(std::get<1>(a));
  return evaluate(c, xs);
}

// Assignment from values for the free variables (in index order); pinned
// slots are filled with zero and overridden during evaluation.
template <class T>
std::vector<T> assignment_for(const Circuit& c, const std::vector<T>& free_values, const T& like) {
  std::vector<T> a(c.num_vars(), ScalarOps<T>::zero(like));
  std::size_t i = 0;
  for (VarIndex v = 0; v < c.num_vars(); ++v) {
    if (c.is_pinned(v)) continue;
    if (i >= free_values.size()) throw ArityError("too few free-variable values");
    a[v] = free_values[i++];
  }
  if (i != free_values.size()) throw ArityError("too many free-variable values");
  return a;
}

// ---------------------------------------------------------------------------

// outer(inner_1(x), ..., inner_k(x)). Pinned variables of `outer` keep their
// pinned value and ignore the corresponding inner circuit.
inline Circuit compose(const Circuit& outer, const std::vector<Circuit>& inner) {
  if (outer.num_vars() != inner.size())
    throw ArityError("compose: outer has " + std::to_string(outer.num_vars()) + " variables but " +
                     std::to_string(inner.size()) + " inner circuits were given");
  std::size_t nv = 0;
  for (const auto& c : inner) nv = std::max(nv, c.num_vars());
  CircuitBuilder b(nv, outer.wide_add() || std::any_of(inner.begin(), inner.end(), [](const Circuit& c) {
                         return c.wide_add();
                       }));
  for (const auto& c : inner)
    for (VarIndex v = 0; v < c.num_vars(); ++v)
      if (c.is_pinned(v)) b.pin(v, *c.pins()[v]);
  std::vector<std::optional<GateId>> map(outer.num_vars());
  for (VarIndex v = 0; v < outer.num_vars(); ++v)
    if (!outer.is_pinned(v)) map[v] = b.import(inner[v]);
  return b.finish(b.import(outer, map));
}

// ---------------------------------------------------------------------------
// Text format: optional "# VARS n" and "# PIN v re im" header lines, then one
// gate per line ("<id> IN <var>", "<id> ADD <c>...", "<id> MUL <a> <b>") and a
// final "OUT <id>".

inline void write_circuit(std::ostream& os, const Circuit& c) {
  os << "# VARS " << c.num_vars() << "\n";
  for (VarIndex v = 0; v < c.num_vars(); ++v)
    if (c.is_pinned(v)) os << "# PIN " << v << " " << c.pins()[v]->re << " " << c.pins()[v]->im << "\n";
  auto live = c.cone();
  std::vector<GateId> ids(c.output() + 1, 0);
  GateId next = 0;
  for (GateId g = 0; g <= c.output(); ++g) {
    if (!live[g]) continue;
    ids[g] = next;
    GateView v = c.gate(g);
    os << next;
    if (v.kind == GateKind::Input) {
      os << " IN " << v.var;
    } else {
      os << (v.kind == GateKind::Add ? " ADD" : " MUL");
      for (GateId ch : v.children) os << " " << ids[ch];
    }
    os << "\n";
    ++next;
  }
  os << "OUT " << ids[c.output()] << "\n";
}

inline std::string to_text(const Circuit& c) {
  std::ostringstream os;
  write_circuit(os, c);
  return os.str();
}

inline Circuit read_circuit(std::istream& is) {
  std::string line;
  std::size_t declared_vars = 0;
  std::vector<std::pair<VarIndex, ExactComplex>> pins;
  struct Row {
    GateKind kind;
    VarIndex var;
    std::vector<GateId> ch;
  };
  std::vector<Row> rows;
  std::optional<GateId> out;
  std::size_t max_var = 0;
  bool any_var = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "#") {
      std::string what;
      ls >> what;
      if (what == "VARS") {
        ls >> declared_vars;
      } else if (what == "PIN") {
        VarIndex v;
        std::string re, im;
        if (!(ls >> v >> re >> im)) throw ParseError("bad PIN line: " + line);
        pins.emplace_back(v, ExactComplex(parse_rational(re), parse_rational(im)));
      }
      continue;
    }
    if (tok[0] == '#') continue;
    if (out) throw ParseError("content after OUT line");
    if (tok == "OUT") {
      GateId o;
      if (!(ls >> o)) throw ParseError("bad OUT line");
      out = o;
      continue;
    }
    GateId id = static_cast<GateId>(std::stoul(tok));
    if (id != rows.size()) throw ParseError("gate ids must be dense and increasing: " + line);
    std::string kind;
    ls >> kind;
    Row r{GateKind::Input, 0, {}};
    if (kind == "IN") {
      if (!(ls >> r.var)) throw ParseError("bad IN line: " + line);
      max_var = std::max<std::size_t>(max_var, r.var);
      any_var = true;
    } else if (kind == "ADD" || kind == "MUL") {
      r.kind = kind == "ADD" ? GateKind::Add : GateKind::Mul;
      GateId c;
      while (ls >> c) {
        if (c >= id) throw ParseError("child id must precede its parent: " + line);
        r.ch.push_back(c);
      }
    } else {
      throw ParseError("unknown gate kind '" + kind + "'");
    }
    rows.push_back(std::move(r));
  }
  if (!out) throw ParseError("missing OUT line");
  std::size_t nv = std::max(declared_vars, any_var ? max_var + 1 : 0);
  for (auto& [v, _] : pins) nv = std::max<std::size_t>(nv, v + 1);
  CircuitBuilder b(nv);
  for (auto& [v, val] : pins) b.pin(v, val);
  for (auto& r : rows) b.raw_gate(r.kind, r.var, r.ch);
  if (*out >= rows.size()) throw ParseError("OUT references unknown gate");
  return b.finish(*out);
}

inline Circuit from_text(const std::string& s) {
  std::istringstream is(s);
  return read_circuit(is);
}

}  // namespace detshallow
