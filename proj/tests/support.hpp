#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the data types.

#include "deepgate/circuit.hpp"
#include "deepgate/graph_prep.hpp"
#include "deepgate/random.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

namespace testsupport {

using deepgate::Circuit;
using deepgate::GateKind;
using deepgate::NodeId;

/// Scalar evaluation of one input assignment, recursing through fanins.
inline std::vector<bool> eval_pattern(const Circuit& c, const std::vector<bool>& pi_values) {
  std::vector<int> val(c.size(), -1);
  std::size_t next_pi = 0;
  for (NodeId v = 0; v < c.size(); ++v)
    if (c.nodes[v].kind == GateKind::Pi) val[v] = pi_values.at(next_pi++) ? 1 : 0;
  std::function<int(NodeId)> get = [&](NodeId v) -> int {
    if (val[v] >= 0) return val[v];
    const auto& n = c.nodes[v];
    std::vector<int> in;
    for (auto u : n.fanins) in.push_back(get(u));
    int r = 0;
    auto all = [&] { int x = 1; for (int b : in) x &= b; return x; };
    auto any = [&] { int x = 0; for (int b : in) x |= b; return x; };
    auto par = [&] { int x = 0; for (int b : in) x ^= b; return x; };
    switch (n.kind) {
      case GateKind::And: r = all(); break;
      case GateKind::Nand: r = 1 - all(); break;
      case GateKind::Or: r = any(); break;
      case GateKind::Nor: r = 1 - any(); break;
      case GateKind::Xor: r = par(); break;
      case GateKind::Xnor: r = 1 - par(); break;
      case GateKind::Not: r = 1 - in.at(0); break;
      case GateKind::Buf: r = in.at(0); break;
      case GateKind::Pi: break;
    }
    return val[v] = r;
  };
  std::vector<bool> out(c.size());
  for (NodeId v = 0; v < c.size(); ++v) out[v] = get(v) == 1;
  return out;
}

/// Exact per-node probabilities by enumerating every assignment pattern by pattern.
inline std::vector<double> brute_force_probabilities(const Circuit& c) {
  const auto n_pi = c.num_inputs();
  std::vector<double> ones(c.size(), 0.0);
  const std::uint64_t total = 1ULL << n_pi;
  for (std::uint64_t p = 0; p < total; ++p) {
    std::vector<bool> in(n_pi);
    for (std::size_t k = 0; k < n_pi; ++k) in[k] = ((p >> k) & 1U) != 0;
    const auto v = eval_pattern(c, in);
    for (std::size_t i = 0; i < v.size(); ++i) ones[i] += v[i] ? 1.0 : 0.0;
  }
  for (auto& o : ones) o /= static_cast<double>(total);
  return ones;
}

/// Output truth tables compared pattern by pattern, PIs paired by position.
inline bool outputs_equivalent(const Circuit& a, const Circuit& b) {
  if (a.num_inputs() != b.num_inputs() || a.outputs.size() != b.outputs.size()) return false;
  const auto n_pi = a.num_inputs();
  for (std::uint64_t p = 0; p < (1ULL << n_pi); ++p) {
    std::vector<bool> in(n_pi);
    for (std::size_t k = 0; k < n_pi; ++k) in[k] = ((p >> k) & 1U) != 0;
    const auto va = eval_pattern(a, in);
    const auto vb = eval_pattern(b, in);
    for (std::size_t o = 0; o < a.outputs.size(); ++o)
      if (va[a.outputs[o]] != vb[b.outputs[o]]) return false;
  }
  return true;
}

/// Random AIG built directly from PI/AND/NOT nodes (not via the generator).
inline deepgate::Aig random_aig(std::uint64_t seed, std::size_t n_pi, std::size_t n_nodes) {
  auto rng = deepgate::make_rng(seed, 99);
  std::vector<deepgate::Node> nodes;
  for (std::size_t i = 0; i < n_pi; ++i) nodes.push_back({GateKind::Pi, {}, "i" + std::to_string(i)});
  while (nodes.size() < n_nodes) {
    const auto n = static_cast<NodeId>(nodes.size());
    if (deepgate::uniform01(rng) < 0.3) {
      nodes.push_back({GateKind::Not, {static_cast<NodeId>(deepgate::uniform_index(rng, n))}, {}});
    } else {
      const auto a = static_cast<NodeId>(deepgate::uniform_index(rng, n));
      auto b = static_cast<NodeId>(deepgate::uniform_index(rng, n));
      if (b == a) b = (a + 1) % n;
      nodes.push_back({GateKind::And, {a, b}, {}});
    }
  }
  std::vector<int> fanout(nodes.size(), 0);
  for (const auto& nd : nodes)
    for (auto u : nd.fanins) ++fanout[u];
  std::vector<NodeId> outs;
  for (NodeId v = 0; v < nodes.size(); ++v)
    if (fanout[v] == 0 && nodes[v].kind != GateKind::Pi) outs.push_back(v);
  if (outs.empty()) outs.push_back(static_cast<NodeId>(nodes.size() - 1));
  return deepgate::make_aig("rand" + std::to_string(seed), std::move(nodes), std::move(outs));
}

/// Levels by repeated relaxation (no topological sort).
inline std::vector<std::uint32_t> relaxed_levels(const Circuit& c) {
  std::vector<std::uint32_t> lv(c.size(), 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId v = 0; v < c.size(); ++v)
      for (auto u : c.nodes[v].fanins)
        if (lv[v] < lv[u] + 1) {
          lv[v] = lv[u] + 1;
          changed = true;
        }
  }
  return lv;
}

/// Nodes reachable from `from` (inclusive) along fanout edges.
inline std::set<NodeId> reachable(const Circuit& c, NodeId from) {
  std::vector<std::vector<NodeId>> fo(c.size());
  for (NodeId v = 0; v < c.size(); ++v)
    for (auto u : c.nodes[v].fanins) fo[u].push_back(v);
  std::set<NodeId> seen{from};
  std::vector<NodeId> stack{from};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : fo[v])
      if (seen.insert(w).second) stack.push_back(w);
  }
  return seen;
}

/// True when two distinct fanout nodes of `stem` both reach `target`.
inline bool two_branches_reach(const Circuit& c, NodeId stem, NodeId target) {
  std::set<NodeId> branches;
  for (NodeId v = 0; v < c.size(); ++v)
    for (auto u : c.nodes[v].fanins)
      if (u == stem) branches.insert(v);
  int hits = 0;
  for (auto b : branches)
    if (reachable(c, b).contains(target)) ++hits;
  return hits >= 2;
}

/// Diamond: x=AND(a,b); n1=NOT(x); n2=AND(x,c); r=AND(n1,n2).
inline deepgate::Aig diamond() {
  using deepgate::Node;
  std::vector<Node> nodes = {{GateKind::Pi, {}, "a"},       {GateKind::Pi, {}, "b"},       {GateKind::Pi, {}, "c"},
                             {GateKind::And, {0, 1}, "x"},  {GateKind::Not, {3}, "n1"},    {GateKind::And, {3, 2}, "n2"},
                             {GateKind::And, {4, 5}, "r"}};
  return deepgate::make_aig("diamond", std::move(nodes), {6});
}

} // namespace testsupport
