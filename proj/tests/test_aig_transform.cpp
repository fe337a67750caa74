#include "deepgate/aig_transform.hpp"
#include "deepgate/error.hpp"
#include "deepgate/graph_prep.hpp"

#include "doctest.h"
#include "support.hpp"

#include <map>
#include <set>
#include <utility>

using namespace deepgate;

namespace {

std::size_t count_kind(const Circuit& c, GateKind k) {
  std::size_t n = 0;
  for (const auto& node : c.nodes) n += node.kind == k;
  return n;
}

void check_aig_shape(const Aig& a) {
  for (const auto& n : a.nodes) {
    switch (n.kind) {
      case GateKind::Pi: CHECK(n.fanins.empty()); break;
      case GateKind::And: CHECK(n.fanins.size() == 2); break;
      case GateKind::Not: CHECK(n.fanins.size() == 1); break;
      default: FAIL("non-AIG node kind");
    }
  }
}

} // namespace

TEST_CASE("decompose of a single OR2 is three NOTs and one AND") {
  const auto n = parse_bench("INPUT(a)\nINPUT(b)\nc = OR(a, b)\nOUTPUT(c)\n");
  const auto a = decompose(n);
  CHECK(a.num_gates() == 4);
  CHECK(count_kind(a, GateKind::Not) == 3);
  CHECK(count_kind(a, GateKind::And) == 1);
  CHECK(a.nodes[a.outputs[0]].kind == GateKind::Not);
  CHECK(testsupport::outputs_equivalent(n, a));
}

TEST_CASE("decompose of a single XOR2 matches its truth table") {
  const auto n = parse_bench("INPUT(a)\nINPUT(b)\nc = XOR(a, b)\nOUTPUT(c)\n");
  const auto a = decompose(n);
  check_aig_shape(a);
  CHECK(testsupport::outputs_equivalent(n, a));
  CHECK(a.size() <= 7 * n.size());
}

TEST_CASE("every gate kind and arity decomposes to an equivalent AIG") {
  for (const char* kind : {"AND", "OR", "NAND", "NOR", "XOR", "XNOR"}) {
    for (int k = 2; k <= 5; ++k) {
      std::string text;
      std::string args;
      for (int i = 0; i < k; ++i) {
        text += "INPUT(i" + std::to_string(i) + ")\n";
        args += (i ? ", i" : "i") + std::to_string(i);
      }
      text += std::string("y = ") + kind + "(" + args + ")\nOUTPUT(y)\n";
      const auto n = parse_bench(text);
      const auto a = decompose(n);
      check_aig_shape(a);
      CAPTURE(kind);
      CAPTURE(k);
      CHECK(testsupport::outputs_equivalent(n, a));
      CHECK(a.size() <= 7 * n.size());
    }
  }
  for (const char* kind : {"NOT", "BUFF"}) {
    const auto n = parse_bench(std::string("INPUT(a)\ny = ") + kind + "(a)\nOUTPUT(y)\n");
    CHECK(testsupport::outputs_equivalent(n, decompose(n)));
  }
}

TEST_CASE("rewrite templates verify exhaustively") { CHECK(verify_templates()); }

TEST_CASE("strash merges a duplicated AND") {
  std::vector<Node> nodes = {{GateKind::Pi, {}, "a"},     {GateKind::Pi, {}, "b"},     {GateKind::And, {0, 1}, "x"},
                             {GateKind::And, {1, 0}, "y"}, {GateKind::Not, {2}, "nx"}, {GateKind::Not, {3}, "ny"}};
  const auto a = make_aig("dup", nodes, {4, 5});
  const auto s = strash(a);
  CHECK(s.size() == 4);
  CHECK(testsupport::outputs_equivalent(a, s));
}

TEST_CASE("strash is idempotent on the diamond") {
  const auto d = testsupport::diamond();
  CHECK(structurally_equal(strash(d), d));
}

TEST_CASE("check_equivalence finds a counterexample") {
  const auto a = parse_bench("INPUT(a)\nINPUT(b)\nc = AND(a, b)\nOUTPUT(c)\n");
  const auto b = parse_bench("INPUT(a)\nINPUT(b)\nc = OR(a, b)\nOUTPUT(c)\n");
  const auto r = check_equivalence(a, b, EquivalenceMode::exhaustive());
  REQUIRE_FALSE(r.equivalent);
  REQUIRE(r.counterexample.size() == 2);
  CHECK(r.counterexample[0] != r.counterexample[1]);
  CHECK(r.input_names == std::vector<std::string>{"a", "b"});

  const auto rr = check_equivalence(a, b, EquivalenceMode::random(256, 3));
  CHECK_FALSE(rr.equivalent);
}

TEST_CASE("check_equivalence pairs PIs by name") {
  const auto a = parse_bench("INPUT(a)\nINPUT(b)\nc = AND(a, NOT_b)\nNOT_b = NOT(b)\nOUTPUT(c)\n");
  const auto b = parse_bench("INPUT(b)\nINPUT(a)\nnb = NOT(b)\nc = AND(a, nb)\nOUTPUT(c)\n");
  CHECK(check_equivalence(a, b, EquivalenceMode::exhaustive()).equivalent);
}

TEST_CASE("check_equivalence error contract") {
  const auto a = parse_bench("INPUT(a)\nc = NOT(a)\nOUTPUT(c)\n");
  const auto b = parse_bench("INPUT(a)\nINPUT(b)\nc = AND(a, b)\nOUTPUT(c)\n");
  try {
    (void)check_equivalence(a, b, EquivalenceMode::exhaustive());
    FAIL("expected PiMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PiMismatch);
  }
  std::string wide;
  for (int i = 0; i < 21; ++i) wide += "INPUT(i" + std::to_string(i) + ")\n";
  wide += "y = AND(i0, i1)\nOUTPUT(y)\n";
  const auto w = parse_bench(wide);
  try {
    (void)check_equivalence(w, w, EquivalenceMode::exhaustive());
    FAIL("expected TooManyInputsForExhaustive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyInputsForExhaustive);
  }
  CHECK(check_equivalence(w, w, EquivalenceMode::random(1024, 1)).equivalent);
}

TEST_CASE("normalize_raw removes BUF and XNOR") {
  const auto n = parse_bench("INPUT(a)\nINPUT(b)\nx = XNOR(a, b)\ny = BUFF(x)\nz = OR(y, a)\nOUTPUT(z)\nOUTPUT(y)\n");
  const auto r = normalize_raw(n);
  CHECK(count_kind(r, GateKind::Buf) == 0);
  CHECK(count_kind(r, GateKind::Xnor) == 0);
  CHECK(testsupport::outputs_equivalent(n, r));
  for (const auto& node : r.nodes) CHECK(feature_index(node.kind, FeatureMode::Raw).has_value());
}

TEST_CASE("property: random netlists decompose and strash to equivalent AIGs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = GeneratorConfig::fixed(3 + seed % 8, 10 + 3 * seed, seed);
    cfg.max_fanin = 2 + seed % 3;
    const auto n = generate_random_circuit(cfg);
    const auto a = decompose(n);
    check_aig_shape(a);
    CHECK(a.size() <= 7 * n.size());
    CHECK(testsupport::outputs_equivalent(n, a));
    const auto s = strash(a);
    check_aig_shape(s);
    CHECK(s.size() <= a.size());
    CHECK(testsupport::outputs_equivalent(a, s));
    CHECK(structurally_equal(strash(s), s));
    std::set<std::pair<NodeId, NodeId>> ands;
    std::set<NodeId> nots;
    for (const auto& node : s.nodes) {
      if (node.kind == GateKind::And)
        CHECK(ands.insert(std::minmax(node.fanins[0], node.fanins[1])).second);
      if (node.kind == GateKind::Not) CHECK(nots.insert(node.fanins[0]).second);
    }
    CHECK(check_equivalence(n, s, EquivalenceMode::exhaustive()).equivalent);
  }
}
