#pragma once

#include "deepgate/circuit.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace deepgate {

/// Rewrites every gate into AND2/NOT fragments. Gates with more than two
/// inputs become left-deep chains; one NOT node is shared per driver.
Aig decompose(const Netlist& netlist);

/// Merges AND2 nodes with the same unordered fanin pair and NOT nodes with
/// the same fanin. No Boolean rewriting; surviving nodes keep their relative
/// id order.
Aig strash(const Aig& aig);

/// Raw-netlist form used for 7-kind feature encoding: BUF gates are
/// forwarded and XNOR becomes XOR followed by NOT.
Netlist normalize_raw(const Netlist& netlist);

/// Exhaustively checks every rewrite template (arity <= 4) against the gate's
/// truth table.
bool verify_templates();

struct EquivalenceMode {
  enum class Kind { Exhaustive, Random } kind = Kind::Exhaustive;
  std::uint64_t patterns = 0;
  std::uint64_t seed = 0;

  static EquivalenceMode exhaustive() { return {}; }
  static EquivalenceMode random(std::uint64_t patterns, std::uint64_t seed) {
    return {Kind::Random, patterns, seed};
  }
};

struct EquivalenceResult {
  bool equivalent = true;
  /// Input assignment (in the first circuit's PI order) exposing a difference.
  std::vector<bool> counterexample;
  std::vector<std::string> input_names;
  std::size_t failing_output = 0;
  std::uint64_t patterns_checked = 0;
};

/// Simulation-based equivalence. PIs are paired by name when every PI in both
/// circuits is named, otherwise by position; outputs are paired by position.
EquivalenceResult check_equivalence(const Circuit& a, const Circuit& b, EquivalenceMode mode);

} // namespace deepgate
