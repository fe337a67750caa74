#pragma once

#include "deepgate/circuit.hpp"
#include "deepgate/simulator.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deepgate {

// ---------------------------------------------------------------------------
// Reconvergence and skip edges

/// A reconvergent node together with the fanout stem it is attributed to.
struct ReconvRecord {
  NodeId stem = 0;
  NodeId reconv = 0;
  std::uint32_t distance = 0; // level(reconv) - level(stem)

  bool operator==(const ReconvRecord&) const = default;
};

/// For every stem (>= 2 distinct fanout nodes), tags each immediate fanout
/// branch and propagates the tags forward; a node reached by two distinct
/// tags reconverges w.r.t. that stem. Each reconvergent node keeps only the
/// nearest stem (smallest distance, then smallest stem id). Sorted by reconv.
std::vector<ReconvRecord> detect_reconvergence(std::span<const Node> nodes, std::span<const std::uint32_t> level);
std::vector<ReconvRecord> detect_reconvergence(const Aig& aig);

/// Sinusoidal encoding of a level difference normalised by the circuit
/// depth: entries (sin(2^k pi D/Lmax), cos(2^k pi D/Lmax)) for k < L.
/// Throws DomainError unless 1 <= distance <= max_level and L >= 1.
std::vector<double> positional_encoding(std::uint32_t distance, std::uint32_t max_level, int L);

// ---------------------------------------------------------------------------
// Labeled graphs

struct SkipEdge {
  NodeId stem = 0;
  NodeId reconv = 0;
  std::uint32_t distance = 0;
  std::vector<double> attr; // 2L entries

  bool operator==(const SkipEdge&) const = default;
};

struct GraphConfig {
  FeatureMode mode = FeatureMode::Aig;
  int encoding_L = 8;
};

struct LabeledGraph {
  std::string name;
  FeatureMode mode = FeatureMode::Aig;
  int encoding_L = 8;
  std::vector<std::uint8_t> feature; // one-hot index per node
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<SkipEdge> skip_edges;
  std::vector<double> label;
  std::vector<std::uint32_t> level;
  std::vector<NodeId> topo;
  std::uint32_t max_level = 0;
  std::uint64_t seed = 0;
  std::uint64_t n_patterns = 0;
  std::string generator;

  std::size_t num_nodes() const { return feature.size(); }
  int feature_width() const { return deepgate::feature_width(mode); }

  bool operator==(const LabeledGraph&) const = default;
};

/// Assembles features, edges, skip edges and labels for an AIG.
LabeledGraph build_graph(const Aig& aig, const ProbabilityMap& probs, const GraphConfig& config = {});

/// Raw-netlist variant (7-kind features). The netlist must already be in
/// normalize_raw form.
LabeledGraph build_graph(const Netlist& netlist, const ProbabilityMap& probs, const GraphConfig& config);

/// Nodes grouped by level, in increasing level order; ids ascending inside a group.
std::vector<std::vector<NodeId>> topological_batches(const LabeledGraph& graph);

// ---------------------------------------------------------------------------
// Synthetic circuits and sub-circuit extraction

struct GeneratorConfig {
  std::uint32_t n_pi_min = 8;
  std::uint32_t n_pi_max = 64;
  std::uint32_t n_gates_min = 28;
  std::uint32_t n_gates_max = 1500;
  std::vector<std::pair<GateKind, double>> mix = {{GateKind::And, 0.30}, {GateKind::Or, 0.20},
                                                  {GateKind::Nand, 0.15}, {GateKind::Nor, 0.10},
                                                  {GateKind::Xor, 0.10}, {GateKind::Not, 0.15}};
  /// Probability that a gate input is drawn from the `window` most recent nodes.
  double locality = 0.6;
  std::uint32_t window = 16;
  /// Multi-input gates draw their arity uniformly from [2, max_fanin].
  std::uint32_t max_fanin = 2;
  /// When levels_max > 0, gates are spread over a depth drawn from
  /// [levels_min, levels_max]; each gate takes one fanin from the level below.
  std::uint32_t levels_min = 0;
  std::uint32_t levels_max = 0;
  std::uint64_t seed = 0;

  static GeneratorConfig fixed(std::uint32_t n_pi, std::uint32_t n_gates, std::uint64_t seed);
};

/// Random acyclic netlist. Gate inputs come from earlier nodes with a locality
/// bias; every node without fanout is an output.
Netlist generate_random_circuit(const GeneratorConfig& config);

/// `count` netlists; circuit i uses seed base.seed + i and is named "gen<i>".
std::vector<Netlist> generate_circuits(const GeneratorConfig& base, std::size_t count);

struct SizeRange {
  std::size_t min = 30;
  std::size_t max = 3000;
};

/// Transitive fan-in cone of `root`, grown breadth-first until it reaches
/// `target_size` nodes; unexpanded boundary nodes become fresh PIs.
Aig extract_cone(const Aig& aig, NodeId root, std::size_t target_size);

/// Cones of random roots with target sizes drawn from `range` (uniformly, or
/// log-uniformly); samples falling outside the range are discarded. Throws
/// ExtractionExhausted after 50 * count failed attempts.
std::vector<Aig> extract_subcircuits(const Aig& aig, SizeRange range, std::size_t count, std::uint64_t seed,
                                     bool log_uniform = false);

struct CorpusConfig {
  std::size_t count = 1000;
  SizeRange size{36, 500};
  std::uint32_t min_level = 3;
  std::uint32_t max_level = 24;
  bool log_uniform = true;
  std::size_t samples_per_parent = 8;
  GeneratorConfig parent{.n_pi_min = 32, .n_pi_max = 96, .n_gates_min = 300, .n_gates_max = 900};
  std::uint64_t n_patterns = kDefaultPatterns;
  std::uint64_t seed = 1;
  GraphConfig graph;
  unsigned threads = 1;
};

/// Sub-circuits of random parent circuits (decomposed and strashed), filtered
/// to the size and level ranges, then simulated and assembled into graphs.
std::vector<LabeledGraph> build_synthetic_corpus(const CorpusConfig& config);

/// Simulates and assembles graphs for a list of circuits; output order
/// follows input order regardless of `threads`.
std::vector<LabeledGraph> label_circuits(const std::vector<Aig>& circuits, std::uint64_t n_patterns,
                                         std::uint64_t seed, const GraphConfig& config, unsigned threads = 1);

/// Raw-mode counterpart of label_circuits: each netlist is normalised
/// (BUF forwarded, XNOR split) and labeled with 7-kind features.
std::vector<LabeledGraph> label_netlists(const std::vector<Netlist>& netlists, std::uint64_t n_patterns,
                                         std::uint64_t seed, int encoding_L = 8, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Datasets

enum class Split : std::uint8_t { Train, Test };

struct Dataset {
  std::vector<LabeledGraph> graphs;
  std::vector<Split> split;
  nlohmann::json config = nlohmann::json::object();

  std::vector<std::size_t> indices(Split which) const;
};

/// Seeded shuffle, then the first round((1 - test_fraction) * n) graphs of
/// the shuffled order train and the rest test. Graph order is unchanged.
Dataset split_dataset(std::vector<LabeledGraph> graphs, double test_fraction, std::uint64_t seed);

/// Line-delimited JSON: a versioned header line, then one graph per line.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

nlohmann::json graph_to_json(const LabeledGraph& graph);
LabeledGraph graph_from_json(const nlohmann::json& j);

} // namespace deepgate
