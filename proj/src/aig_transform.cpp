#include "deepgate/aig_transform.hpp"

#include "deepgate/error.hpp"
#include "deepgate/random.hpp"
#include "deepgate/simulator.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace deepgate {

namespace {

class AigBuilder {
public:
  NodeId input(std::string name) { return push(Node{GateKind::Pi, {}, std::move(name)}); }

  NodeId and2(NodeId a, NodeId b) { return push(Node{GateKind::And, {a, b}, {}}); }

  NodeId inv(NodeId a) {
    auto [it, inserted] = not_of_.try_emplace(a, static_cast<NodeId>(nodes_.size()));
    if (inserted) push(Node{GateKind::Not, {a}, {}});
    return it->second;
  }

  NodeId and_chain(const std::vector<NodeId>& in) {
    NodeId acc = and2(in[0], in[1]);
    for (std::size_t k = 2; k < in.size(); ++k) acc = and2(acc, in[k]);
    return acc;
  }

  NodeId xor2(NodeId a, NodeId b) {
    const NodeId left = inv(and2(a, inv(b)));
    const NodeId right = inv(and2(inv(a), b));
    return inv(and2(left, right));
  }

  NodeId gate(GateKind kind, const std::vector<NodeId>& in) {
    std::vector<NodeId> neg;
    switch (kind) {
    case GateKind::Buf: return in[0];
    case GateKind::Not: return inv(in[0]);
    case GateKind::And: return and_chain(in);
    case GateKind::Nand: return inv(and_chain(in));
    case GateKind::Or:
      for (NodeId u : in) neg.push_back(inv(u));
      return inv(and_chain(neg));
    case GateKind::Nor:
      for (NodeId u : in) neg.push_back(inv(u));
      return and_chain(neg);
    case GateKind::Xor:
    case GateKind::Xnor: {
      NodeId acc = xor2(in[0], in[1]);
      for (std::size_t k = 2; k < in.size(); ++k) acc = xor2(acc, in[k]);
      return kind == GateKind::Xor ? acc : inv(acc);
    }
    case GateKind::Pi: break;
    }
    throw Error(ErrorCode::UnsupportedGateKind, std::string(to_string(kind)));
  }

  std::vector<Node>& nodes() { return nodes_; }

private:
  NodeId push(Node node) {
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::unordered_map<NodeId, NodeId> not_of_;
};

Aig decompose_impl(const Netlist& netlist) {
  validate(netlist);
  AigBuilder builder;
  std::vector<NodeId> map(netlist.size());
  for (NodeId v : topo_order(netlist.nodes)) {
    const auto& node = netlist.nodes[v];
    if (node.kind == GateKind::Pi) {
      map[v] = builder.input(node.name);
      continue;
    }
    std::vector<NodeId> in;
    in.reserve(node.fanins.size());
    for (NodeId u : node.fanins) in.push_back(map[u]);
    map[v] = builder.gate(node.kind, in);
    auto& target = builder.nodes()[map[v]];
    if (target.name.empty() && target.kind != GateKind::Pi) target.name = node.name;
  }
  std::vector<NodeId> outputs;
  for (NodeId o : netlist.outputs) outputs.push_back(map[o]);
  return make_aig(netlist.name, std::move(builder.nodes()), std::move(outputs));
}

bool gate_truth(GateKind kind, const std::vector<bool>& in) {
  const auto ones = static_cast<std::size_t>(std::count(in.begin(), in.end(), true));
  switch (kind) {
  case GateKind::Buf: return in[0];
  case GateKind::Not: return !in[0];
  case GateKind::And: return ones == in.size();
  case GateKind::Nand: return ones != in.size();
  case GateKind::Or: return ones > 0;
  case GateKind::Nor: return ones == 0;
  case GateKind::Xor: return (ones & 1U) != 0;
  case GateKind::Xnor: return (ones & 1U) == 0;
  case GateKind::Pi: break;
  }
  return false;
}

struct PiPairing {
  std::vector<NodeId> a;
  std::vector<NodeId> b; // b[k] pairs with a[k]
};

PiPairing pair_inputs(const Circuit& a, const Circuit& b) {
  PiPairing p{a.inputs(), b.inputs()};
  if (p.a.size() != p.b.size())
    throw Error(ErrorCode::PiMismatch, "input counts differ: " + std::to_string(p.a.size()) + " vs " +
                                           std::to_string(p.b.size()));
  if (a.outputs.size() != b.outputs.size())
    throw Error(ErrorCode::PiMismatch, "output counts differ: " + std::to_string(a.outputs.size()) + " vs " +
                                           std::to_string(b.outputs.size()));
  const auto all_named = [](const Circuit& c, const std::vector<NodeId>& pis) {
    return std::all_of(pis.begin(), pis.end(), [&](NodeId v) { return !c.nodes[v].name.empty(); });
  };
  if (all_named(a, p.a) && all_named(b, p.b)) {
    std::unordered_map<std::string, NodeId> by_name;
    for (NodeId v : p.b) by_name.emplace(b.nodes[v].name, v);
    std::vector<NodeId> paired;
    for (NodeId v : p.a) {
      auto it = by_name.find(a.nodes[v].name);
      if (it == by_name.end()) throw Error(ErrorCode::PiMismatch, "input '" + a.nodes[v].name + "' missing");
      paired.push_back(it->second);
    }
    p.b = std::move(paired);
  }
  return p;
}

} // namespace

Aig decompose(const Netlist& netlist) {
  static const bool templates_ok = verify_templates();
  if (!templates_ok) throw std::logic_error("AIG rewrite templates failed self-check");
  return decompose_impl(netlist);
}

bool verify_templates() {
  static constexpr GateKind kinds[] = {GateKind::And, GateKind::Or,   GateKind::Nand, GateKind::Nor,
                                       GateKind::Xor, GateKind::Xnor, GateKind::Not,  GateKind::Buf};
  for (GateKind kind : kinds) {
    const bool unary = kind == GateKind::Not || kind == GateKind::Buf;
    for (std::size_t arity = unary ? 1 : 2; arity <= (unary ? 1 : 4); ++arity) {
      Netlist n;
      for (std::size_t k = 0; k < arity; ++k) n.nodes.push_back(Node{GateKind::Pi, {}, "x" + std::to_string(k)});
      Node g{kind, {}, "g"};
      for (NodeId k = 0; k < arity; ++k) g.fanins.push_back(k);
      n.nodes.push_back(g);
      n.outputs = {static_cast<NodeId>(arity)};
      const Aig aig = decompose_impl(n);
      const auto words = exhaustive_input_words(arity);
      std::vector<std::uint64_t> values(aig.size());
      const auto pis = aig.inputs();
      for (std::size_t k = 0; k < arity; ++k) values[pis[k]] = words[k];
      evaluate_words(aig.nodes, aig.topo, 1, values);
      const auto out = values[aig.outputs[0]];
      for (std::uint64_t p = 0; p < (1ULL << arity); ++p) {
        std::vector<bool> in(arity);
        for (std::size_t k = 0; k < arity; ++k) in[k] = ((p >> k) & 1U) != 0;
        if ((((out >> p) & 1U) != 0) != gate_truth(kind, in)) return false;
      }
    }
  }
  return true;
}

Aig strash(const Aig& aig) {
  const auto n = aig.size();
  std::vector<NodeId> rep(n);
  std::map<std::pair<NodeId, NodeId>, NodeId> and_table;
  std::unordered_map<NodeId, NodeId> not_table;
  for (NodeId v : aig.topo) {
    const auto& node = aig.nodes[v];
    switch (node.kind) {
    case GateKind::And: {
      const NodeId a = rep[node.fanins[0]], b = rep[node.fanins[1]];
      rep[v] = and_table.try_emplace({std::min(a, b), std::max(a, b)}, v).first->second;
      break;
    }
    case GateKind::Not: rep[v] = not_table.try_emplace(rep[node.fanins[0]], v).first->second; break;
    default: rep[v] = v;
    }
  }
  constexpr auto kNone = static_cast<NodeId>(-1);
  std::vector<NodeId> new_id(n, kNone);
  std::vector<Node> nodes;
  for (NodeId v = 0; v < n; ++v)
    if (rep[v] == v) {
      new_id[v] = static_cast<NodeId>(nodes.size());
      nodes.push_back(aig.nodes[v]);
    }
  for (NodeId v = 0; v < n; ++v) {
    auto& target = nodes[new_id[rep[v]]];
    if (rep[v] == v) {
      for (auto& f : target.fanins) f = new_id[rep[f]];
    } else if (target.name.empty()) {
      target.name = aig.nodes[v].name;
    }
  }
  std::vector<NodeId> outputs;
  for (NodeId o : aig.outputs) outputs.push_back(new_id[rep[o]]);
  return make_aig(aig.name, std::move(nodes), std::move(outputs));
}

Netlist normalize_raw(const Netlist& netlist) {
  validate(netlist);
  Netlist out;
  out.name = netlist.name;
  std::vector<NodeId> map(netlist.size());
  for (NodeId v : topo_order(netlist.nodes)) {
    const auto& node = netlist.nodes[v];
    if (node.kind == GateKind::Buf) {
      map[v] = map[node.fanins[0]];
      continue;
    }
    Node copy = node;
    for (auto& f : copy.fanins) f = map[f];
    if (node.kind == GateKind::Xnor) {
      copy.kind = GateKind::Xor;
      copy.name.clear();
      out.nodes.push_back(std::move(copy));
      const auto x = static_cast<NodeId>(out.nodes.size() - 1);
      out.nodes.push_back(Node{GateKind::Not, {x}, node.name});
    } else {
      out.nodes.push_back(std::move(copy));
    }
    map[v] = static_cast<NodeId>(out.nodes.size() - 1);
  }
  for (NodeId o : netlist.outputs) out.outputs.push_back(map[o]);
  return out;
}

EquivalenceResult check_equivalence(const Circuit& a, const Circuit& b, EquivalenceMode mode) {
  const auto pairing = pair_inputs(a, b);
  const auto num_in = pairing.a.size();
  const bool exhaustive = mode.kind == EquivalenceMode::Kind::Exhaustive;
  if (exhaustive && num_in > kMaxExhaustiveInputs)
    throw Error(ErrorCode::TooManyInputsForExhaustive,
                std::to_string(num_in) + " inputs exceed the limit of " + std::to_string(kMaxExhaustiveInputs));

  const std::uint64_t patterns = exhaustive ? (1ULL << num_in) : mode.patterns;
  const std::size_t total_words = std::max<std::uint64_t>(1, (patterns + 63) / 64);
  const std::uint64_t last_mask = (patterns % 64 == 0) ? ~0ULL : ((1ULL << (patterns % 64)) - 1);
  const auto order_a = topo_order(a.nodes);
  const auto order_b = topo_order(b.nodes);

  std::vector<Rng> streams;
  if (!exhaustive)
    for (std::size_t k = 0; k < num_in; ++k) streams.push_back(make_rng(mode.seed, k));

  constexpr std::size_t kBlock = 64;
  std::vector<std::uint64_t> va(a.size() * kBlock), vb(b.size() * kBlock), in(num_in * kBlock);
  static constexpr std::uint64_t kLowMasks[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL,
                                                 0xF0F0F0F0F0F0F0F0ULL, 0xFF00FF00FF00FF00ULL,
                                                 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  EquivalenceResult result;
  result.patterns_checked = patterns;
  for (NodeId v : pairing.a) result.input_names.push_back(a.nodes[v].name);

  for (std::size_t first = 0; first < total_words; first += kBlock) {
    const std::size_t words = std::min(kBlock, total_words - first);
    for (std::size_t k = 0; k < num_in; ++k)
      for (std::size_t w = 0; w < words; ++w) {
        const std::size_t gw = first + w;
        in[k * words + w] = exhaustive ? (k < 6 ? kLowMasks[k] : (((gw >> (k - 6)) & 1U) ? ~0ULL : 0ULL))
                                       : streams[k]();
      }
    for (std::size_t k = 0; k < num_in; ++k) {
      std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(k * words), words,
                  va.begin() + static_cast<std::ptrdiff_t>(pairing.a[k] * words));
      std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(k * words), words,
                  vb.begin() + static_cast<std::ptrdiff_t>(pairing.b[k] * words));
    }
    evaluate_words(a.nodes, order_a, words, va);
    evaluate_words(b.nodes, order_b, words, vb);
    for (std::size_t o = 0; o < a.outputs.size(); ++o) {
      for (std::size_t w = 0; w < words; ++w) {
        auto diff = va[a.outputs[o] * words + w] ^ vb[b.outputs[o] * words + w];
        if (first + w == total_words - 1) diff &= last_mask;
        if (diff == 0) continue;
        const auto bit = static_cast<std::size_t>(std::countr_zero(diff));
        result.equivalent = false;
        result.failing_output = o;
        result.counterexample.resize(num_in);
        for (std::size_t k = 0; k < num_in; ++k) result.counterexample[k] = ((in[k * words + w] >> bit) & 1U) != 0;
        return result;
      }
    }
  }
  return result;
}

} // namespace deepgate
