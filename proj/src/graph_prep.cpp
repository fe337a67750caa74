#include "deepgate/graph_prep.hpp"

#include "deepgate/aig_transform.hpp"
#include "deepgate/error.hpp"
#include "deepgate/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <fstream>
#include <numbers>
#include <queue>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace deepgate {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Reconvergence

std::vector<ReconvRecord> detect_reconvergence(std::span<const Node> nodes, std::span<const std::uint32_t> level) {
  const auto n = nodes.size();
  const auto order = topo_order(nodes);
  std::vector<std::uint32_t> position(n);
  for (std::size_t i = 0; i < n; ++i) position[order[i]] = static_cast<std::uint32_t>(i);

  auto fanout = fanout_lists(nodes);
  for (auto& fo : fanout) {
    std::sort(fo.begin(), fo.end());
    fo.erase(std::unique(fo.begin(), fo.end()), fo.end());
  }

  constexpr std::uint32_t kUnseen = 0xFFFFFFFFU;
  constexpr std::uint32_t kMulti = 0xFFFFFFFEU;
  std::vector<std::uint32_t> tag(n, kUnseen);
  std::vector<std::uint32_t> epoch(n, kUnseen);
  std::vector<std::uint32_t> best_stem(n, kUnseen);
  std::vector<std::uint32_t> best_dist(n, kUnseen);

  using Item = std::pair<std::uint32_t, NodeId>; // (topo position, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;

  for (NodeId s = 0; s < n; ++s) {
    const auto& branches = fanout[s];
    if (branches.size() < 2) continue;
    const auto stamp = s;
    const auto visit = [&](NodeId v) {
      if (epoch[v] != stamp) {
        epoch[v] = stamp;
        tag[v] = kUnseen;
        frontier.emplace(position[v], v);
      }
    };
    for (std::uint32_t b = 0; b < branches.size(); ++b) visit(branches[b]);
    for (std::uint32_t b = 0; b < branches.size(); ++b) tag[branches[b]] = b;

    while (!frontier.empty()) {
      const NodeId v = frontier.top().second;
      frontier.pop();
      std::uint32_t t = tag[v];
      for (NodeId u : nodes[v].fanins) {
        if (u == s || epoch[u] != stamp) continue;
        const auto tu = tag[u];
        if (tu == kUnseen) continue;
        if (t == kUnseen) t = tu;
        else if (t != tu) t = kMulti;
      }
      tag[v] = t;
      if (t == kMulti) {
        const auto d = level[v] - level[s];
        if (d < best_dist[v] || (d == best_dist[v] && s < best_stem[v])) {
          best_dist[v] = d;
          best_stem[v] = s;
        }
      }
      for (NodeId w : fanout[v]) visit(w);
    }
  }

  std::vector<ReconvRecord> records;
  for (NodeId v = 0; v < n; ++v)
    if (best_stem[v] != kUnseen) records.push_back(ReconvRecord{best_stem[v], v, best_dist[v]});
  return records;
}

std::vector<ReconvRecord> detect_reconvergence(const Aig& aig) { return detect_reconvergence(aig.nodes, aig.level); }

std::vector<double> positional_encoding(std::uint32_t distance, std::uint32_t max_level, int L) {
  if (L < 1) throw Error(ErrorCode::DomainError, "encoding dimension L must be positive");
  if (distance == 0 || distance > max_level)
    throw Error(ErrorCode::DomainError,
                "level difference " + std::to_string(distance) + " outside [1, " + std::to_string(max_level) + "]");
  const double normalized = static_cast<double>(distance) / static_cast<double>(max_level);
  std::vector<double> out(2 * static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    const double angle = std::ldexp(1.0, k) * std::numbers::pi * normalized;
    out[2 * k] = std::sin(angle);
    out[2 * k + 1] = std::cos(angle);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph assembly

namespace {

LabeledGraph assemble(const Circuit& circuit, const ProbabilityMap& probs, const GraphConfig& config,
                      std::vector<std::uint32_t> level, std::vector<NodeId> topo) {
  const auto n = circuit.size();
  if (probs.prob.size() != n)
    throw Error(ErrorCode::LengthMismatch, "probability map has " + std::to_string(probs.prob.size()) +
                                               " entries for " + std::to_string(n) + " nodes");
  LabeledGraph g;
  g.name = circuit.name;
  g.mode = config.mode;
  g.encoding_L = config.encoding_L;
  g.feature.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto idx = feature_index(circuit.nodes[v].kind, config.mode);
    if (!idx)
      throw Error(ErrorCode::UnsupportedGateKind,
                  std::string(to_string(circuit.nodes[v].kind)) + " has no feature encoding in this mode");
    g.feature[v] = static_cast<std::uint8_t>(*idx);
    for (NodeId u : circuit.nodes[v].fanins) g.edges.emplace_back(u, v);
  }
  g.label = probs.prob;
  g.max_level = level.empty() ? 0 : *std::max_element(level.begin(), level.end());
  for (const auto& r : detect_reconvergence(circuit.nodes, level)) {
    const auto& fanins = circuit.nodes[r.reconv].fanins;
    // A stem that also drives the reconvergent node directly already has an edge.
    if (std::find(fanins.begin(), fanins.end(), r.stem) != fanins.end()) continue;
    g.skip_edges.push_back(SkipEdge{r.stem, r.reconv, r.distance,
                                    positional_encoding(r.distance, g.max_level, config.encoding_L)});
  }
  g.level = std::move(level);
  g.topo = std::move(topo);
  g.seed = probs.seed;
  g.n_patterns = probs.n_patterns;
  g.generator = probs.generator;
  return g;
}

} // namespace

LabeledGraph build_graph(const Aig& aig, const ProbabilityMap& probs, const GraphConfig& config) {
  if (config.mode != FeatureMode::Aig)
    throw Error(ErrorCode::ConfigMismatch, "AIG graphs use the 3-kind feature mode");
  return assemble(aig, probs, config, aig.level, aig.topo);
}

LabeledGraph build_graph(const Netlist& netlist, const ProbabilityMap& probs, const GraphConfig& config) {
  return assemble(netlist, probs, config, levelize(netlist), topo_order(netlist));
}

std::vector<std::vector<NodeId>> topological_batches(const LabeledGraph& graph) {
  std::vector<std::vector<NodeId>> groups(graph.num_nodes() ? graph.max_level + 1 : 0);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) groups[graph.level[v]].push_back(v);
  return groups;
}

// ---------------------------------------------------------------------------
// Generator

GeneratorConfig GeneratorConfig::fixed(std::uint32_t n_pi, std::uint32_t n_gates, std::uint64_t seed) {
  GeneratorConfig c;
  c.n_pi_min = c.n_pi_max = n_pi;
  c.n_gates_min = c.n_gates_max = n_gates;
  c.seed = seed;
  return c;
}

Netlist generate_random_circuit(const GeneratorConfig& config) {
  if (config.n_pi_min < 2 || config.n_pi_max < config.n_pi_min)
    throw Error(ErrorCode::DomainError, "need n_pi >= 2");
  if (config.n_gates_min < 1 || config.n_gates_max < config.n_gates_min)
    throw Error(ErrorCode::DomainError, "need n_gates >= 1");
  if (config.mix.empty()) throw Error(ErrorCode::DomainError, "empty gate mix");
  double total_weight = 0;
  for (const auto& [kind, w] : config.mix) {
    if (kind == GateKind::Pi || w < 0) throw Error(ErrorCode::DomainError, "bad gate mix entry");
    total_weight += w;
  }
  if (total_weight <= 0) throw Error(ErrorCode::DomainError, "gate mix has zero weight");
  if (config.levels_max > 0 && (config.levels_min < 1 || config.levels_max < config.levels_min))
    throw Error(ErrorCode::DomainError, "need 1 <= levels_min <= levels_max");

  auto rng = make_rng(config.seed);
  const auto n_pi = static_cast<std::uint32_t>(uniform_int(rng, config.n_pi_min, config.n_pi_max));
  const auto n_gates = static_cast<std::uint32_t>(uniform_int(rng, config.n_gates_min, config.n_gates_max));
  const bool levelled = config.levels_max > 0;
  const auto depth =
      levelled ? std::min(n_gates, static_cast<std::uint32_t>(uniform_int(rng, config.levels_min, config.levels_max))) : 0U;
  // level_start[l] is the first node id of level l; levels are created in order.
  std::vector<NodeId> level_start = {0, n_pi};

  Netlist net;
  net.name = "rand_s" + std::to_string(config.seed);
  for (std::uint32_t k = 0; k < n_pi; ++k) net.nodes.push_back(Node{GateKind::Pi, {}, "pi" + std::to_string(k)});
  std::vector<std::uint32_t> fanout_count(n_pi + n_gates, 0);
  // Nodes still lacking a fanout, in creation order (swap-remove keeps it O(1)).
  std::vector<NodeId> unused(n_pi);
  std::vector<std::uint32_t> unused_pos(n_pi + n_gates, 0xFFFFFFFFU);
  for (NodeId k = 0; k < n_pi; ++k) {
    unused[k] = k;
    unused_pos[k] = k;
  }
  const auto mark_used = [&](NodeId v) {
    if (fanout_count[v]++ != 0) return;
    const auto pos = unused_pos[v];
    unused[pos] = unused.back();
    unused_pos[unused[pos]] = pos;
    unused.pop_back();
  };

  for (std::uint32_t g = 0; g < n_gates; ++g) {
    double pick = uniform01(rng) * total_weight;
    GateKind kind = config.mix.back().first;
    for (const auto& [k, w] : config.mix) {
      if (pick < w) {
        kind = k;
        break;
      }
      pick -= w;
    }
    auto existing = static_cast<std::uint32_t>(net.nodes.size());
    NodeId below = 0; // first node of the previous level
    if (levelled) {
      const auto level = 1 + static_cast<std::uint32_t>(static_cast<std::uint64_t>(g) * depth / n_gates);
      if (level + 1 > level_start.size()) level_start.push_back(existing);
      existing = level_start[level];
      below = level_start[level - 1];
    }
    std::uint32_t arity = 1;
    if (kind != GateKind::Not && kind != GateKind::Buf)
      arity = static_cast<std::uint32_t>(uniform_int(rng, 2, std::max<std::uint32_t>(2, config.max_fanin)));
    arity = std::min(arity, existing);
    if (arity < 2 && kind != GateKind::Not && kind != GateKind::Buf) kind = GateKind::Not;

    std::vector<NodeId> fanins;
    for (std::uint32_t slot = 0; slot < arity; ++slot) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        NodeId cand;
        const double r = uniform01(rng);
        if (levelled && slot == 0) {
          cand = below + static_cast<NodeId>(uniform_index(rng, existing - below));
        } else if (!unused.empty() && r < 0.35) {
          cand = unused[uniform_index(rng, unused.size())];
          if (cand >= existing) continue;
        } else if (r < 0.35 + 0.65 * config.locality) {
          const auto w = std::min(config.window, existing);
          cand = existing - 1 - static_cast<NodeId>(uniform_index(rng, w));
        } else {
          cand = static_cast<NodeId>(uniform_index(rng, existing));
        }
        if (std::find(fanins.begin(), fanins.end(), cand) == fanins.end()) {
          fanins.push_back(cand);
          break;
        }
      }
    }
    if (fanins.size() < 2 && kind != GateKind::Not && kind != GateKind::Buf) {
      for (NodeId c = existing; c-- > 0 && fanins.size() < 2;)
        if (std::find(fanins.begin(), fanins.end(), c) == fanins.end()) fanins.push_back(c);
    }
    for (NodeId f : fanins) mark_used(f);
    const auto id = static_cast<NodeId>(net.nodes.size());
    net.nodes.push_back(Node{kind, std::move(fanins), "g" + std::to_string(g)});
    unused_pos[id] = static_cast<std::uint32_t>(unused.size());
    unused.push_back(id);
  }
  for (NodeId v = 0; v < net.nodes.size(); ++v)
    if (fanout_count[v] == 0) net.outputs.push_back(v);
  return net;
}

// ---------------------------------------------------------------------------
// Extraction

Aig extract_cone(const Aig& aig, NodeId root, std::size_t target_size) {
  if (root >= aig.size()) throw Error(ErrorCode::DomainError, "root out of range");
  std::vector<std::uint8_t> state(aig.size(), 0); // 1 = boundary, 2 = expanded
  std::deque<NodeId> boundary{root};
  state[root] = 1;
  std::size_t expanded = 0, leaves = 0;
  const auto size = [&] { return expanded + leaves + boundary.size(); };
  bool first = true;
  while (!boundary.empty() && (first || size() < target_size)) {
    const NodeId v = boundary.front();
    boundary.pop_front();
    if (aig.nodes[v].kind == GateKind::Pi) {
      ++leaves;
      continue;
    }
    first = false;
    state[v] = 2;
    ++expanded;
    for (NodeId u : aig.nodes[v].fanins)
      if (state[u] == 0) {
        state[u] = 1;
        boundary.push_back(u);
      }
  }
  // Kept nodes in original id order; everything not expanded becomes a PI.
  std::vector<NodeId> new_id(aig.size(), static_cast<NodeId>(-1));
  std::vector<Node> nodes;
  for (NodeId v = 0; v < aig.size(); ++v)
    if (state[v] == 1) {
      new_id[v] = static_cast<NodeId>(nodes.size());
      nodes.push_back(Node{GateKind::Pi, {}, aig.nodes[v].name.empty() ? "n" + std::to_string(v) : aig.nodes[v].name});
    }
  for (NodeId v = 0; v < aig.size(); ++v)
    if (state[v] == 2) {
      new_id[v] = static_cast<NodeId>(nodes.size());
      nodes.push_back(aig.nodes[v]);
    }
  for (auto& node : nodes)
    for (auto& f : node.fanins) f = new_id[f];
  return make_aig(aig.name + "_cone" + std::to_string(root), std::move(nodes), {new_id[root]});
}

std::vector<Aig> extract_subcircuits(const Aig& aig, SizeRange range, std::size_t count, std::uint64_t seed,
                                     bool log_uniform) {
  if (range.min == 0 || range.max < range.min) throw Error(ErrorCode::DomainError, "bad size range");
  std::vector<NodeId> roots;
  for (NodeId v = 0; v < aig.size(); ++v)
    if (aig.nodes[v].kind != GateKind::Pi) roots.push_back(v);
  if (aig.size() < range.min || roots.empty())
    throw Error(ErrorCode::ExtractionExhausted, "circuit smaller than the minimum sub-circuit size");
  auto rng = make_rng(seed);
  std::vector<Aig> out;
  const std::size_t max_attempts = 50 * std::max<std::size_t>(count, 1);
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < count; ++attempt) {
    const NodeId root = roots[uniform_index(rng, roots.size())];
    std::size_t target;
    if (log_uniform) {
      const double lo = std::log(static_cast<double>(range.min));
      const double hi = std::log(static_cast<double>(range.max));
      target = static_cast<std::size_t>(std::llround(std::exp(lo + (hi - lo) * uniform01(rng))));
    } else {
      target = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(range.min),
                                                    static_cast<std::int64_t>(range.max)));
    }
    auto cone = extract_cone(aig, root, target);
    if (cone.size() < range.min || cone.size() > range.max) continue;
    out.push_back(std::move(cone));
  }
  if (out.size() < count)
    throw Error(ErrorCode::ExtractionExhausted, "found " + std::to_string(out.size()) + " of " +
                                                    std::to_string(count) + " sub-circuits");
  return out;
}

namespace {

/// Runs fn(i) for i < count on `threads` workers; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, count))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

} // namespace

std::vector<LabeledGraph> label_circuits(const std::vector<Aig>& circuits, std::uint64_t n_patterns,
                                         std::uint64_t seed, const GraphConfig& config, unsigned threads) {
  std::vector<LabeledGraph> graphs(circuits.size());
  parallel_for(circuits.size(), threads, [&](std::size_t i) {
    const auto probs = simulate(circuits[i], n_patterns, seed + i);
    graphs[i] = build_graph(circuits[i], probs, config);
  });
  return graphs;
}

std::vector<LabeledGraph> label_netlists(const std::vector<Netlist>& netlists, std::uint64_t n_patterns,
                                         std::uint64_t seed, int encoding_L, unsigned threads) {
  std::vector<LabeledGraph> graphs(netlists.size());
  const GraphConfig config{FeatureMode::Raw, encoding_L};
  parallel_for(netlists.size(), threads, [&](std::size_t i) {
    const auto raw = normalize_raw(netlists[i]);
    const auto probs = simulate(raw, n_patterns, seed + i);
    graphs[i] = build_graph(raw, probs, config);
  });
  return graphs;
}

std::vector<Netlist> generate_circuits(const GeneratorConfig& base, std::size_t count) {
  std::vector<Netlist> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto cfg = base;
    cfg.seed = base.seed + i;
    out.push_back(generate_random_circuit(cfg));
    out.back().name = "gen" + std::to_string(i);
  }
  return out;
}

std::vector<LabeledGraph> build_synthetic_corpus(const CorpusConfig& config) {
  std::vector<Aig> circuits;
  for (std::uint64_t parent = 0; circuits.size() < config.count; ++parent) {
    if (parent > 100 + 10 * config.count)
      throw Error(ErrorCode::ExtractionExhausted, "corpus generation made no progress");
    auto gen = config.parent;
    gen.seed = config.seed * 1000003ULL + parent;
    const Aig aig = strash(decompose(generate_random_circuit(gen)));
    if (aig.size() < config.size.min) continue;
    std::vector<Aig> cones;
    try {
      cones = extract_subcircuits(aig, config.size, config.samples_per_parent, gen.seed ^ 0x5eedULL,
                                  config.log_uniform);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ExtractionExhausted) throw;
      continue;
    }
    for (auto& cone : cones) {
      const auto depth = cone.max_level();
      if (depth < config.min_level || depth > config.max_level) continue;
      cone.name = "syn" + std::to_string(circuits.size());
      circuits.push_back(std::move(cone));
      if (circuits.size() == config.count) break;
    }
  }
  return label_circuits(circuits, config.n_patterns, config.seed, config.graph, config.threads);
}

// ---------------------------------------------------------------------------
// Datasets

std::vector<std::size_t> Dataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) out.push_back(i);
  return out;
}

Dataset split_dataset(std::vector<LabeledGraph> graphs, double test_fraction, std::uint64_t seed) {
  if (graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no graphs to split");
  if (test_fraction < 0 || test_fraction > 1) throw Error(ErrorCode::DomainError, "test fraction outside [0, 1]");
  const auto n = graphs.size();
  const auto n_train = static_cast<std::size_t>(std::llround((1.0 - test_fraction) * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto rng = make_rng(seed);
  shuffle(order, rng);
  Dataset ds;
  ds.split.assign(n, Split::Test);
  for (std::size_t i = 0; i < n_train; ++i) ds.split[order[i]] = Split::Train;
  ds.graphs = std::move(graphs);
  ds.config["split_seed"] = seed;
  ds.config["test_fraction"] = test_fraction;
  return ds;
}

json graph_to_json(const LabeledGraph& g) {
  json j;
  j["name"] = g.name;
  j["mode"] = g.mode == FeatureMode::Aig ? "aig" : "raw";
  j["feature_width"] = g.feature_width();
  j["encoding_L"] = g.encoding_L;
  j["num_nodes"] = g.num_nodes();
  j["features"] = g.feature;
  std::vector<NodeId> src, dst;
  for (const auto& [u, v] : g.edges) {
    src.push_back(u);
    dst.push_back(v);
  }
  j["edge_src"] = src;
  j["edge_dst"] = dst;
  json skip = json::array();
  for (const auto& s : g.skip_edges) skip.push_back({{"stem", s.stem}, {"reconv", s.reconv}, {"distance", s.distance}, {"attr", s.attr}});
  j["skip_edges"] = skip;
  j["labels"] = g.label;
  j["levels"] = g.level;
  j["topo"] = g.topo;
  j["max_level"] = g.max_level;
  j["seed"] = g.seed;
  j["n_patterns"] = g.n_patterns;
  j["generator"] = g.generator;
  return j;
}

LabeledGraph graph_from_json(const json& j) {
  LabeledGraph g;
  try {
    g.name = j.at("name").get<std::string>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "aig" && mode != "raw") throw Error(ErrorCode::FormatError, "unknown feature mode '" + mode + "'");
    g.mode = mode == "aig" ? FeatureMode::Aig : FeatureMode::Raw;
    g.encoding_L = j.at("encoding_L").get<int>();
    g.feature = j.at("features").get<std::vector<std::uint8_t>>();
    const auto src = j.at("edge_src").get<std::vector<NodeId>>();
    const auto dst = j.at("edge_dst").get<std::vector<NodeId>>();
    if (src.size() != dst.size()) throw Error(ErrorCode::FormatError, "edge arrays differ in length");
    for (std::size_t i = 0; i < src.size(); ++i) g.edges.emplace_back(src[i], dst[i]);
    for (const auto& s : j.at("skip_edges"))
      g.skip_edges.push_back(SkipEdge{s.at("stem").get<NodeId>(), s.at("reconv").get<NodeId>(),
                                      s.at("distance").get<std::uint32_t>(), s.at("attr").get<std::vector<double>>()});
    g.label = j.at("labels").get<std::vector<double>>();
    g.level = j.at("levels").get<std::vector<std::uint32_t>>();
    g.topo = j.at("topo").get<std::vector<NodeId>>();
    g.max_level = j.at("max_level").get<std::uint32_t>();
    g.seed = j.at("seed").get<std::uint64_t>();
    g.n_patterns = j.at("n_patterns").get<std::uint64_t>();
    g.generator = j.at("generator").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("graph record: ") + e.what());
  }
  const auto n = g.num_nodes();
  if (g.label.size() != n || g.level.size() != n || g.topo.size() != n)
    throw Error(ErrorCode::FormatError, "per-node arrays disagree in length in graph '" + g.name + "'");
  for (auto f : g.feature)
    if (f >= g.feature_width()) throw Error(ErrorCode::FormatError, "feature index out of range");
  for (const auto& [u, v] : g.edges)
    if (u >= n || v >= n || g.level[u] >= g.level[v]) throw Error(ErrorCode::FormatError, "bad edge");
  for (const auto& s : g.skip_edges)
    if (s.stem >= n || s.reconv >= n || s.attr.size() != 2 * static_cast<std::size_t>(g.encoding_L))
      throw Error(ErrorCode::FormatError, "bad skip edge");
  return g;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  json header;
  header["format"] = "deepgate-dataset";
  header["version"] = 1;
  header["num_graphs"] = ds.graphs.size();
  header["config"] = ds.config;
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    auto j = graph_to_json(ds.graphs[i]);
    j["split"] = ds.split.at(i) == Split::Train ? "train" : "test";
    out << j.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, "empty dataset file");
  Dataset ds;
  std::size_t expected = 0;
  try {
    const auto header = json::parse(line);
    if (header.at("format") != "deepgate-dataset") throw Error(ErrorCode::FormatError, "not a dataset file");
    if (header.at("version") != 1) throw Error(ErrorCode::FormatError, "unsupported dataset version");
    expected = header.at("num_graphs").get<std::size_t>();
    ds.config = header.value("config", json::object());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("dataset header: ") + e.what());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": " + e.what());
    }
    ds.graphs.push_back(graph_from_json(j));
    const auto split = j.value("split", std::string("train"));
    if (split != "train" && split != "test")
      throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": bad split '" + split + "'");
    ds.split.push_back(split == "train" ? Split::Train : Split::Test);
  }
  if (ds.graphs.size() != expected)
    throw Error(ErrorCode::FormatError, "header promises " + std::to_string(expected) + " graphs, found " +
                                            std::to_string(ds.graphs.size()));
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_dataset(out, dataset);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return read_dataset(in);
}

} // namespace deepgate
