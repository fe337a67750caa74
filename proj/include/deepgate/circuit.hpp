#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepgate {

using NodeId = std::uint32_t;

enum class GateKind : std::uint8_t { Pi, And, Or, Nand, Nor, Xor, Xnor, Not, Buf };

std::string_view to_string(GateKind kind);

/// Case-insensitive BENCH gate keyword lookup (`BUFF` is accepted as `BUF`).
std::optional<GateKind> gate_kind_from_name(std::string_view name);

/// Node feature vocabulary. AIG graphs use {PI, AND, NOT}; raw netlists use
/// {PI, AND, OR, NAND, NOR, XOR, NOT}.
enum class FeatureMode : std::uint8_t { Aig, Raw };

int feature_width(FeatureMode mode);
std::optional<int> feature_index(GateKind kind, FeatureMode mode);
GateKind kind_from_feature(int index, FeatureMode mode);

struct Node {
  GateKind kind = GateKind::Pi;
  std::vector<NodeId> fanins;
  std::string name;

  bool operator==(const Node&) const = default;
};

/// Node storage shared by netlists and AIGs. Node ids are dense indices into
/// `nodes`, assigned in declaration order.
struct Circuit {
  std::string name;
  std::vector<Node> nodes;
  std::vector<NodeId> outputs;

  std::size_t size() const { return nodes.size(); }
  std::vector<NodeId> inputs() const;
  std::size_t num_inputs() const;
  std::size_t num_gates() const { return size() - num_inputs(); }
};

/// Generic gate-level circuit as read from BENCH.
struct Netlist : Circuit {};

/// PI / AND2 / NOT graph with cached levels and topological order.
struct Aig : Circuit {
  std::vector<std::uint32_t> level;
  std::vector<NodeId> topo;

  std::uint32_t max_level() const;
};

/// Kahn order; nodes become ready in FIFO order, seeded with sources by id.
/// Throws CycleDetected.
std::vector<NodeId> topo_order(std::span<const Node> nodes);
inline std::vector<NodeId> topo_order(const Circuit& c) { return topo_order(c.nodes); }

/// level(PI) = 0, level(v) = 1 + max over fanins. Throws CycleDetected.
std::vector<std::uint32_t> levelize(std::span<const Node> nodes);
inline std::vector<std::uint32_t> levelize(const Circuit& c) { return levelize(c.nodes); }

std::vector<std::vector<NodeId>> fanout_lists(std::span<const Node> nodes);

/// Checks the netlist invariants (ids, arities, acyclicity, at least one PI).
void validate(const Netlist& netlist);

/// Validates AIG arities and computes level/topo.
Aig make_aig(std::string name, std::vector<Node> nodes, std::vector<NodeId> outputs);

/// Reinterprets an AIG as a netlist (same ids).
Netlist to_netlist(const Aig& aig);

Netlist parse_bench(std::string_view text, std::string name = {});
std::string write_bench(const Circuit& circuit);

/// Combinational AIGER ASCII ("aag"). Negated literals become explicit NOT
/// nodes, one per negated driver, appended after the AND nodes.
Aig parse_aiger_ascii(std::string_view text, std::string name = {});
std::string write_aiger_ascii(const Aig& aig);

/// Unique printable name per node: its own name, or `n<id>`.
std::vector<std::string> node_names(const Circuit& circuit);

/// Isomorphism check anchored at the PIs (matched by position) and the
/// outputs (matched by position); fanin order is significant.
bool structurally_equal(const Circuit& a, const Circuit& b);

} // namespace deepgate
