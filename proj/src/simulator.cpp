#include "deepgate/simulator.hpp"

#include "deepgate/error.hpp"
#include "deepgate/random.hpp"

#include <algorithm>
#include <bit>
#include <thread>

namespace deepgate {

namespace {

constexpr std::size_t kBlockWords = 32;

std::uint64_t valid_mask(std::uint64_t patterns) {
  return patterns >= 64 ? ~0ULL : ((1ULL << patterns) - 1);
}

} // namespace

void evaluate_words(std::span<const Node> nodes, std::span<const NodeId> order, std::size_t words,
                    std::span<std::uint64_t> values) {
  for (NodeId v : order) {
    const auto& node = nodes[v];
    if (node.kind == GateKind::Pi) continue;
    auto* out = values.data() + static_cast<std::size_t>(v) * words;
    const auto row = [&](std::size_t k) { return values.data() + static_cast<std::size_t>(node.fanins[k]) * words; };
    const auto* in0 = row(0);
    std::copy(in0, in0 + words, out);
    switch (node.kind) {
    case GateKind::Buf: break;
    case GateKind::Not:
      for (std::size_t w = 0; w < words; ++w) out[w] = ~out[w];
      break;
    case GateKind::And:
    case GateKind::Nand:
      for (std::size_t k = 1; k < node.fanins.size(); ++k) {
        const auto* in = row(k);
        for (std::size_t w = 0; w < words; ++w) out[w] &= in[w];
      }
      if (node.kind == GateKind::Nand)
        for (std::size_t w = 0; w < words; ++w) out[w] = ~out[w];
      break;
    case GateKind::Or:
    case GateKind::Nor:
      for (std::size_t k = 1; k < node.fanins.size(); ++k) {
        const auto* in = row(k);
        for (std::size_t w = 0; w < words; ++w) out[w] |= in[w];
      }
      if (node.kind == GateKind::Nor)
        for (std::size_t w = 0; w < words; ++w) out[w] = ~out[w];
      break;
    case GateKind::Xor:
    case GateKind::Xnor:
      for (std::size_t k = 1; k < node.fanins.size(); ++k) {
        const auto* in = row(k);
        for (std::size_t w = 0; w < words; ++w) out[w] ^= in[w];
      }
      if (node.kind == GateKind::Xnor)
        for (std::size_t w = 0; w < words; ++w) out[w] = ~out[w];
      break;
    case GateKind::Pi: break;
    }
  }
}

ProbabilityMap simulate(const Circuit& circuit, std::uint64_t n_patterns, std::uint64_t seed, unsigned threads) {
  if (n_patterns == 0) throw Error(ErrorCode::DomainError, "n_patterns must be positive");
  const auto order = topo_order(circuit.nodes);
  const auto pis = circuit.inputs();
  const auto n = circuit.size();
  const std::size_t total_words = (n_patterns + 63) / 64;

  std::vector<std::uint64_t> pi_words(pis.size() * total_words);
  for (std::size_t k = 0; k < pis.size(); ++k) {
    auto rng = make_rng(seed, k);
    for (std::size_t w = 0; w < total_words; ++w) pi_words[k * total_words + w] = rng();
  }

  const std::size_t num_blocks = (total_words + kBlockWords - 1) / kBlockWords;
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(num_blocks)));
  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(n, 0));

  const auto worker = [&](unsigned t) {
    std::vector<std::uint64_t> values(n * kBlockWords);
    auto& counts = partial[t];
    for (std::size_t b = t; b < num_blocks; b += threads) {
      const std::size_t first = b * kBlockWords;
      const std::size_t words = std::min(kBlockWords, total_words - first);
      for (std::size_t k = 0; k < pis.size(); ++k)
        std::copy_n(pi_words.begin() + static_cast<std::ptrdiff_t>(k * total_words + first), words,
                    values.begin() + static_cast<std::ptrdiff_t>(pis[k] * words));
      evaluate_words(circuit.nodes, order, words, values);
      for (std::size_t v = 0; v < n; ++v) {
        std::uint64_t c = 0;
        for (std::size_t w = 0; w < words; ++w) c += static_cast<std::uint64_t>(std::popcount(values[v * words + w]));
        counts[v] += c;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }

  ProbabilityMap map;
  map.n_patterns = total_words * 64;
  map.seed = seed;
  map.generator = std::string(kRngAlgorithm);
  map.ones.assign(n, 0);
  for (const auto& counts : partial)
    for (std::size_t v = 0; v < n; ++v) map.ones[v] += counts[v];
  map.prob.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    map.prob[v] = static_cast<double>(map.ones[v]) / static_cast<double>(map.n_patterns);
  return map;
}

std::vector<std::uint64_t> exhaustive_input_words(std::size_t num_inputs) {
  if (num_inputs > kMaxExhaustiveInputs)
    throw Error(ErrorCode::TooManyInputsForExhaustive,
                std::to_string(num_inputs) + " inputs exceed the limit of " + std::to_string(kMaxExhaustiveInputs));
  const std::uint64_t patterns = 1ULL << num_inputs;
  const std::size_t words = std::max<std::uint64_t>(1, patterns / 64);
  static constexpr std::uint64_t kLowMasks[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL,
                                                 0xF0F0F0F0F0F0F0F0ULL, 0xFF00FF00FF00FF00ULL,
                                                 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  std::vector<std::uint64_t> out(num_inputs * words);
  for (std::size_t k = 0; k < num_inputs; ++k)
    for (std::size_t w = 0; w < words; ++w)
      out[k * words + w] = k < 6 ? kLowMasks[k] : (((w >> (k - 6)) & 1U) ? ~0ULL : 0ULL);
  return out;
}

ProbabilityMap exhaustive_probabilities(const Circuit& circuit) {
  const auto pis = circuit.inputs();
  const auto pi_words = exhaustive_input_words(pis.size());
  const auto order = topo_order(circuit.nodes);
  const std::uint64_t patterns = 1ULL << pis.size();
  const std::size_t words = std::max<std::uint64_t>(1, patterns / 64);
  const auto n = circuit.size();
  std::vector<std::uint64_t> values(n * words);
  for (std::size_t k = 0; k < pis.size(); ++k)
    std::copy_n(pi_words.begin() + static_cast<std::ptrdiff_t>(k * words), words,
                values.begin() + static_cast<std::ptrdiff_t>(pis[k] * words));
  evaluate_words(circuit.nodes, order, words, values);

  const auto mask = valid_mask(patterns);
  ProbabilityMap map;
  map.n_patterns = patterns;
  map.generator = "exhaustive";
  map.ones.assign(n, 0);
  map.prob.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::uint64_t c = 0;
    for (std::size_t w = 0; w < words; ++w) c += static_cast<std::uint64_t>(std::popcount(values[v * words + w] & mask));
    map.ones[v] = c;
    map.prob[v] = static_cast<double>(c) / static_cast<double>(patterns);
  }
  return map;
}

} // namespace deepgate
