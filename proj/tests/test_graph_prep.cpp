#include "deepgate/aig_transform.hpp"
#include "deepgate/error.hpp"
#include "deepgate/graph_prep.hpp"

#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace deepgate;

namespace {

/// Reference reconvergence: every stem whose two distinct branches both reach
/// the node; keep the nearest stem (then smallest id).
std::vector<ReconvRecord> reconv_oracle(const Aig& a) {
  std::vector<ReconvRecord> out;
  for (NodeId v = 0; v < a.size(); ++v) {
    std::optional<ReconvRecord> best;
    for (NodeId s = 0; s < a.size(); ++s) {
      if (s == v || !testsupport::two_branches_reach(a, s, v)) continue;
      const ReconvRecord r{s, v, a.level[v] - a.level[s]};
      if (!best || r.distance < best->distance || (r.distance == best->distance && s < best->stem)) best = r;
    }
    if (best) out.push_back(*best);
  }
  return out;
}

} // namespace

TEST_CASE("diamond has one reconvergence at distance 2") {
  const auto d = testsupport::diamond();
  const auto rec = detect_reconvergence(d);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0] == ReconvRecord{3, 6, 2});
}

TEST_CASE("positional encoding values") {
  const auto e = positional_encoding(2, 3, 8);
  REQUIRE(e.size() == 16);
  for (int k = 0; k < 8; ++k) {
    const double arg = std::ldexp(1.0, k) * std::numbers::pi * 2.0 / 3.0;
    CHECK(e[2 * k] == doctest::Approx(std::sin(arg)).epsilon(1e-12));
    CHECK(e[2 * k + 1] == doctest::Approx(std::cos(arg)).epsilon(1e-12));
  }
  const auto full = positional_encoding(5, 5, 2);
  CHECK(std::abs(full[0]) < 1e-12);
  CHECK(full[1] == doctest::Approx(-1.0));
  for (auto [d, m, L] : {std::tuple{0U, 3U, 8}, std::tuple{4U, 3U, 8}, std::tuple{1U, 3U, 0}}) {
    try {
      (void)positional_encoding(d, m, L);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainError);
    }
  }
}

TEST_CASE("diamond graph has one skip edge and exact labels") {
  const auto d = testsupport::diamond();
  const auto g = build_graph(d, exhaustive_probabilities(d));
  CHECK(g.num_nodes() == 7);
  CHECK(g.edges.size() == 7);
  REQUIRE(g.skip_edges.size() == 1);
  CHECK(g.skip_edges[0].stem == 3);
  CHECK(g.skip_edges[0].reconv == 6);
  CHECK(g.skip_edges[0].attr == positional_encoding(2, 3, 8));
  CHECK(g.feature == std::vector<std::uint8_t>{0, 0, 0, 1, 2, 1, 1});
  CHECK(g.label[3] == 0.25);
  CHECK(g.label[6] == 0.0); // NOT(ab) AND (ab AND c)
  const auto batches = topological_batches(g);
  REQUIRE(batches.size() == 4);
  CHECK(batches[0] == std::vector<NodeId>{0, 1, 2});
  CHECK(batches[2] == std::vector<NodeId>{4, 5});
}

TEST_CASE("a chain has no reconvergence") {
  const auto a = decompose(parse_bench("INPUT(a)\nINPUT(b)\nc = AND(a, b)\nd = NOT(c)\ne = NOT(d)\n"));
  CHECK(detect_reconvergence(a).empty());
}

TEST_CASE("skip edge is dropped when the stem is a direct fanin") {
  // x fans out to n=NOT(x) and to r=AND(x, n): r reconverges on x, but x->r already exists.
  std::vector<Node> nodes = {{GateKind::Pi, {}, "a"}, {GateKind::Pi, {}, "b"}, {GateKind::And, {0, 1}, "x"},
                             {GateKind::Not, {2}, "n"}, {GateKind::And, {2, 3}, "r"}};
  const auto a = make_aig("tri", nodes, {4});
  CHECK(detect_reconvergence(a).size() == 1);
  CHECK(build_graph(a, exhaustive_probabilities(a)).skip_edges.empty());
}

TEST_CASE("property: reconvergence matches the reachability oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto a = testsupport::random_aig(300 + seed, 4 + seed % 4, 25 + seed);
    CAPTURE(seed);
    CHECK(detect_reconvergence(a) == reconv_oracle(a));
  }
}

TEST_CASE("property: graph invariants hold on random AIGs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = testsupport::random_aig(400 + seed, 8, 150);
    const auto g = build_graph(a, simulate(a, 1024, seed));
    std::set<std::pair<NodeId, NodeId>> plain(g.edges.begin(), g.edges.end());
    CHECK(plain.size() == g.edges.size());
    for (auto [u, v] : g.edges) CHECK(g.level[u] < g.level[v]);
    for (const auto& s : g.skip_edges) {
      CHECK_FALSE(plain.contains({s.stem, s.reconv}));
      CHECK(s.distance == g.level[s.reconv] - g.level[s.stem]);
      CHECK(s.distance >= 2);
      CHECK(s.attr.size() == 16);
      for (double x : s.attr) CHECK(std::abs(x) <= 1.0);
    }
    for (double y : g.label) CHECK((y >= 0.0 && y <= 1.0));
    std::size_t total = 0;
    for (const auto& b : topological_batches(g)) total += b.size();
    CHECK(total == g.num_nodes());
  }
}

TEST_CASE("raw graphs use seven-kind features") {
  const auto n = normalize_raw(parse_bench("INPUT(a)\nINPUT(b)\nx = XOR(a, b)\ny = NOR(x, a)\nOUTPUT(y)\n"));
  const auto g = build_graph(n, exhaustive_probabilities(n), {FeatureMode::Raw, 8});
  CHECK(g.feature_width() == 7);
  CHECK(g.feature[2] == *feature_index(GateKind::Xor, FeatureMode::Raw));
  CHECK(g.feature[3] == *feature_index(GateKind::Nor, FeatureMode::Raw));
}

TEST_CASE("generator is deterministic and produces the requested sizes") {
  const auto cfg = GeneratorConfig::fixed(10, 80, 5);
  const auto a = generate_random_circuit(cfg);
  const auto b = generate_random_circuit(cfg);
  CHECK(structurally_equal(a, b));
  CHECK(a.num_inputs() == 10);
  CHECK(a.num_gates() == 80);
  CHECK_FALSE(a.outputs.empty());
  const auto many = generate_circuits(cfg, 3);
  REQUIRE(many.size() == 3);
  CHECK(many[1].name == "gen1");
  CHECK_FALSE(structurally_equal(many[0], many[1]));
}

TEST_CASE("levelled generation bounds the netlist depth") {
  auto cfg = GeneratorConfig::fixed(12, 400, 8);
  cfg.levels_min = cfg.levels_max = 10;
  const auto n = generate_random_circuit(cfg);
  CHECK(n.num_gates() == 400);
  const auto lv = levelize(n);
  CHECK(*std::max_element(lv.begin(), lv.end()) == 10);
  cfg.levels_min = 0;
  CHECK_THROWS_AS(generate_random_circuit(cfg), Error);
}

TEST_CASE("extracted cones are AIGs rooted at one output") {
  const auto parent = strash(decompose(generate_random_circuit(GeneratorConfig::fixed(20, 400, 9))));
  const auto cones = extract_subcircuits(parent, {30, 120}, 10, 3);
  CHECK(cones.size() == 10);
  for (const auto& c : cones) {
    CHECK(c.size() >= 30);
    CHECK(c.size() <= 120);
    REQUIRE(c.outputs.size() == 1);
    CHECK(testsupport::reachable(c, 0).contains(c.outputs[0]));
    for (NodeId v = 0; v < c.size(); ++v) CHECK(testsupport::reachable(c, v).contains(c.outputs[0]));
  }
  try {
    (void)extract_subcircuits(parent, {100000, 200000}, 1, 3);
    FAIL("expected ExtractionExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExtractionExhausted);
  }
}

TEST_CASE("dataset split and JSON round trip") {
  std::vector<LabeledGraph> graphs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = testsupport::random_aig(500 + s, 5, 40);
    graphs.push_back(build_graph(a, simulate(a, 640, s)));
  }
  const auto ds = split_dataset(graphs, 0.3, 2);
  CHECK(ds.indices(Split::Train).size() == 7);
  CHECK(ds.indices(Split::Test).size() == 3);
  CHECK(split_dataset(graphs, 0.3, 2).split == ds.split);
  std::stringstream buf;
  write_dataset(buf, ds);
  const auto back = read_dataset(buf);
  CHECK(back.graphs == ds.graphs);
  CHECK(back.split == ds.split);

  std::stringstream bad("{\"format\":\"nope\"}\n");
  try {
    (void)read_dataset(bad);
    FAIL("expected FormatError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FormatError);
  }
}

TEST_CASE("label_circuits order does not depend on threads") {
  std::vector<Aig> cs;
  for (std::uint64_t s = 0; s < 6; ++s) cs.push_back(testsupport::random_aig(600 + s, 6, 60));
  CHECK(label_circuits(cs, 1024, 4, {}, 1) == label_circuits(cs, 1024, 4, {}, 3));
}
