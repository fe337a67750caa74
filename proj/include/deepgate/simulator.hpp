#pragma once

#include "deepgate/circuit.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace deepgate {

/// Default pattern count: 100k rounded up to a multiple of the word width.
inline constexpr std::uint64_t kDefaultPatterns = 100032;
inline constexpr std::size_t kMaxExhaustiveInputs = 20;

/// Per-node signal probability: fraction of simulated patterns at logic 1.
struct ProbabilityMap {
  std::vector<double> prob;
  std::vector<std::uint64_t> ones;
  std::uint64_t n_patterns = 0;
  std::uint64_t seed = 0;
  std::string generator; // PRNG identifier, or "exhaustive"
};

/// Evaluates every non-PI node of `nodes` over `words` 64-pattern words, in
/// `order`. `values` is node-major (`values[v * words + w]`); PI rows must be
/// filled by the caller.
void evaluate_words(std::span<const Node> nodes, std::span<const NodeId> order, std::size_t words,
                    std::span<std::uint64_t> values);

/// Random-pattern simulation. `n_patterns` is rounded up to a multiple of 64;
/// PI k (in id order) draws its bits from stream k of `seed`. The result does
/// not depend on `threads`.
ProbabilityMap simulate(const Circuit& circuit, std::uint64_t n_patterns = kDefaultPatterns,
                        std::uint64_t seed = 0, unsigned threads = 1);

/// Exact probabilities by enumerating all 2^#PI assignments (#PI <= 20).
ProbabilityMap exhaustive_probabilities(const Circuit& circuit);

/// PI words for exhaustive enumeration: assignment index p sets PI k to bit k of p.
std::vector<std::uint64_t> exhaustive_input_words(std::size_t num_inputs);

} // namespace deepgate
