#pragma once

#include <vector>

#include "detshallow/circuit.hpp"

namespace detshallow {

// Size bound for a single or batched extraction up to order k:
//   |C'| <= (k+1)^2 * |C| + 2   (the +2 covers the shared zero/one pins).
inline std::size_t extraction_size_bound(std::size_t circuit_size, std::size_t k) {
  return (k + 1) * (k + 1) * circuit_size + 2;
}

// Depth bound for fan-in-2 inputs: each level of the source becomes one
// multiplication level plus a balanced sum of at most k+1 products.
inline std::size_t extraction_depth_bound(std::size_t depth, std::size_t k) {
  std::size_t tree = 0;
  while ((std::size_t{1} << tree) < k + 1) ++tree;
  return depth * (1 + tree);
}

namespace detail {

// Coefficient table (v, i) for every gate in the cone of `c`; entry i of the
// returned row for the output gate is the gate computing [z^i] p_output.
inline std::vector<GateId> extraction_table(CircuitBuilder& b, const Circuit& c, VarIndex z_var, std::size_t k) {
  auto live = c.cone();
  std::vector<std::vector<GateId>> slots(c.output() + 1);
  GateId zero = b.zero();
  for (GateId g = 0; g <= c.output(); ++g) {
    if (!live[g]) continue;
    GateView v = c.gate(g);
    std::vector<GateId>& row = slots[g];
    if (v.kind == GateKind::Input) {
      if (v.var == z_var) {
        row = {zero};
        if (k >= 1) row.push_back(b.one());
      } else {
        row = {b.input(v.var)};
      }
    } else if (v.kind == GateKind::Add) {
      std::size_t len = 0;
      for (GateId ch : v.children) len = std::max(len, slots[ch].size());
      row.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<GateId> terms;
        for (GateId ch : v.children)
          if (i < slots[ch].size()) terms.push_back(slots[ch][i]);
        row[i] = terms.size() == 2 ? b.add(terms[0], terms[1]) : b.sum(terms);
      }
    } else {
      const auto& l = slots[v.children[0]];
      const auto& r = slots[v.children[1]];
      std::size_t len = std::min(k + 1, l.size() + r.size() - 1);
      row.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<GateId> terms;
        for (std::size_t j = 0; j <= i; ++j)
          if (j < l.size() && i - j < r.size()) terms.push_back(b.mul(l[j], r[i - j]));
        row[i] = b.sum(terms);
      }
    }
  }
  std::vector<GateId> out = slots[c.output()];
  out.resize(k + 1, zero);
  return out;
}

}  // namespace detail

// Circuit computing [z^k] p_output in the remaining variables (z_var stays in
// the variable space but is unused).
inline Circuit extract_coefficient(const Circuit& c, VarIndex z_var, long k) {
  if (k < 0) throw ParameterError("coefficient index must be non-negative");
  if (z_var >= c.num_vars()) throw ParameterError("z variable out of range");
  CircuitBuilder b = CircuitBuilder::like(c);
  auto table = detail::extraction_table(b, c, z_var, static_cast<std::size_t>(k));
  Circuit out = b.finish(table[static_cast<std::size_t>(k)]);
  Metrics src = c.metrics();
  Metrics dst = out.metrics();
  if (dst.size > extraction_size_bound(src.size, static_cast<std::size_t>(k)))
    throw Error("coefficient extraction exceeded its size bound");
  if (c.max_add_fanin() <= 2 && dst.depth > extraction_depth_bound(src.depth, static_cast<std::size_t>(k)) &&
      dst.depth > 0)
    throw Error("coefficient extraction exceeded its depth bound");
  return out;
}

// [z^0] ... [z^k_max] over one shared DAG.
inline MultiCircuit extract_coefficients_batch(const Circuit& c, VarIndex z_var, long k_max) {
  if (k_max < 0) throw ParameterError("coefficient index must be non-negative");
  if (z_var >= c.num_vars()) throw ParameterError("z variable out of range");
  CircuitBuilder b = CircuitBuilder::like(c);
  auto table = detail::extraction_table(b, c, z_var, static_cast<std::size_t>(k_max));
  MultiCircuit mc = b.finish_multi(table);
  if (mc.size() > extraction_size_bound(c.size(), static_cast<std::size_t>(k_max)))
    throw Error("batched coefficient extraction exceeded its size bound");
  return mc;
}

}  // namespace detshallow
