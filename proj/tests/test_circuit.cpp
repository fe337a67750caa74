#include "deepgate/circuit.hpp"
#include "deepgate/error.hpp"

#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <string>

using namespace deepgate;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

const char* kOneAnd = "INPUT(a)\nINPUT(b)\nc = AND(a, b)\nOUTPUT(c)\n";

} // namespace

TEST_CASE("parse_bench transcribes a one-gate netlist") {
  const auto n = parse_bench(kOneAnd);
  CHECK(n.num_inputs() == 2);
  CHECK(n.num_gates() == 1);
  REQUIRE(n.outputs.size() == 1);
  CHECK(n.nodes[n.outputs[0]].kind == GateKind::And);
  CHECK(n.nodes[2].fanins == std::vector<NodeId>{0, 1});
  CHECK(n.nodes[2].name == "c");
}

TEST_CASE("parse_bench error contract") {
  CHECK(code_of([] { parse_bench("c = AND(a, b)\nOUTPUT(c)\n"); }) == ErrorCode::UndefinedSignal);
  CHECK(code_of([] { parse_bench("a = NOT(a)\n"); }) == ErrorCode::CycleDetected);
  CHECK(code_of([] { parse_bench("INPUT(a)\nINPUT(a)\n"); }) == ErrorCode::DuplicateDefinition);
  CHECK(code_of([] { parse_bench("INPUT(a)\nb = FOO(a)\n"); }) == ErrorCode::UnsupportedGateKind);
  CHECK(code_of([] { parse_bench("INPUT(a)\nb = AND(a\n"); }) == ErrorCode::SyntaxError);
  CHECK(code_of([] { parse_bench("INPUT(a)\nb = NOT(a, a)\n"); }) == ErrorCode::SyntaxError);
  CHECK(code_of([] { parse_bench("# only a comment\n"); }) == ErrorCode::NoPrimaryInputs);
  CHECK(code_of([] { parse_bench("INPUT(a)\nx = AND(a, y)\ny = AND(a, x)\n"); }) == ErrorCode::CycleDetected);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse_bench("INPUT(a)\n\n# c\nb = AND(a, zz)\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.code() == ErrorCode::UndefinedSignal);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("BENCH keywords are case-insensitive and whitespace-tolerant") {
  const auto n = parse_bench("input( a )\n  INPUT(b)\n\tc=nand( a ,b ) # trailing\noutput(c)\nd = buff(c)\n");
  CHECK(n.num_inputs() == 2);
  CHECK(n.nodes[2].kind == GateKind::Nand);
  CHECK(n.nodes[3].kind == GateKind::Buf);
}

TEST_CASE("BENCH accepts forward references with declaration-order ids") {
  const auto n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(x)\nx = BUF(a)\n");
  CHECK(n.nodes[1].name == "y");
  CHECK(n.nodes[1].fanins == std::vector<NodeId>{2});
  const auto topo = topo_order(n);
  const auto pos = [&](NodeId v) { return std::find(topo.begin(), topo.end(), v) - topo.begin(); };
  CHECK(pos(2) < pos(1));
}

TEST_CASE("parse_aiger_ascii minimal and negated outputs") {
  const auto a = parse_aiger_ascii("aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n");
  CHECK(a.num_inputs() == 2);
  CHECK(a.size() == 3);
  CHECK(a.nodes[a.outputs[0]].kind == GateKind::And);

  const auto b = parse_aiger_ascii("aag 3 2 0 1 1\n2\n4\n7\n6 2 4\n");
  CHECK(b.size() == 4);
  const auto& out = b.nodes[b.outputs[0]];
  CHECK(out.kind == GateKind::Not);
  CHECK(b.nodes[out.fanins[0]].kind == GateKind::And);
}

TEST_CASE("AIGER shares one NOT node per negated driver") {
  const auto a = parse_aiger_ascii("aag 4 2 0 2 2\n2\n4\n8\n7\n6 3 5\n8 3 4\n");
  std::size_t nots = 0;
  for (const auto& n : a.nodes) nots += n.kind == GateKind::Not;
  // Negations of var 1, var 2 and var 3: one NOT each, even though var 1 is negated twice.
  CHECK(nots == 3);
}

TEST_CASE("parse_aiger_ascii error contract") {
  CHECK(code_of([] { parse_aiger_ascii("aag 1 1 1 1 0\n2\n2 3\n3\n"); }) == ErrorCode::LatchesUnsupported);
  CHECK(code_of([] { parse_aiger_ascii("aig 3 2 0 1 1\n"); }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] { parse_aiger_ascii("aag 3 2 0 1\n"); }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] { parse_aiger_ascii("aag 2 1 0 1 0\n2\n6\n"); }) == ErrorCode::LiteralOutOfRange);
  CHECK(code_of([] { parse_aiger_ascii("aag 3 2 0 1 1\n2\n4\n6\n6 2 9\n"); }) == ErrorCode::LiteralOutOfRange);
  CHECK(code_of([] { parse_aiger_ascii("aag 2 1 0 1 0\n2\n4\n"); }) == ErrorCode::UndefinedSignal);
  CHECK(code_of([] { parse_aiger_ascii("aag 1 1 0 1 0\n2\n1\n"); }) == ErrorCode::UnsupportedGateKind);
}

TEST_CASE("levelize follows the chain convention") {
  const auto n = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(z)\nc = AND(a, b)\nd = NOT(c)\ne = AND(d, a)\n");
  const auto lv = levelize(n);
  CHECK(lv[0] == 0);
  CHECK(lv[2] == 0); // isolated PI
  CHECK(lv[3] == 1);
  CHECK(lv[4] == 2);
  CHECK(lv[5] == 3);
}

TEST_CASE("topo order of a PI-only circuit is declaration order") {
  const auto n = parse_bench("INPUT(p)\nINPUT(q)\nINPUT(r)\n");
  CHECK(topo_order(n) == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("diamond topo order respects the partial order") {
  const auto d = testsupport::diamond();
  const auto pos = [&](NodeId v) { return std::find(d.topo.begin(), d.topo.end(), v) - d.topo.begin(); };
  CHECK(pos(3) < pos(4));
  CHECK(pos(3) < pos(5));
  CHECK(pos(4) < pos(6));
  CHECK(pos(5) < pos(6));
}

TEST_CASE("write_bench round-trips") {
  const auto n = parse_bench(kOneAnd);
  CHECK(structurally_equal(parse_bench(write_bench(n)), n));
}

TEST_CASE("write_aiger_ascii round-trips parsed AIGs") {
  const auto a = parse_aiger_ascii("aag 4 2 0 2 2\n2\n4\n8\n7\n6 3 5\n8 3 4\n");
  const auto again = parse_aiger_ascii(write_aiger_ascii(a));
  CHECK(structurally_equal(a, again));
}

TEST_CASE("structurally_equal notices a changed gate") {
  const auto a = parse_bench(kOneAnd);
  const auto b = parse_bench("INPUT(a)\nINPUT(b)\nc = OR(a, b)\nOUTPUT(c)\n");
  CHECK_FALSE(structurally_equal(a, b));
}

TEST_CASE("make_aig rejects malformed AND/NOT arities") {
  std::vector<Node> bad = {{GateKind::Pi, {}, "a"}, {GateKind::And, {0}, "x"}};
  CHECK(code_of([&] { make_aig("bad", bad, {1}); }) == ErrorCode::InvalidStructure);
  std::vector<Node> orgate = {{GateKind::Pi, {}, "a"}, {GateKind::Pi, {}, "b"}, {GateKind::Or, {0, 1}, "x"}};
  CHECK(code_of([&] { make_aig("bad", orgate, {2}); }) == ErrorCode::UnsupportedGateKind);
}

TEST_CASE("feature encodings are one-hot with the documented widths") {
  CHECK(feature_width(FeatureMode::Aig) == 3);
  CHECK(feature_width(FeatureMode::Raw) == 7);
  CHECK(feature_index(GateKind::Pi, FeatureMode::Aig) == 0);
  CHECK(feature_index(GateKind::And, FeatureMode::Aig) == 1);
  CHECK(feature_index(GateKind::Not, FeatureMode::Aig) == 2);
  CHECK_FALSE(feature_index(GateKind::Or, FeatureMode::Aig).has_value());
  for (int k = 0; k < 7; ++k) CHECK(feature_index(kind_from_feature(k, FeatureMode::Raw), FeatureMode::Raw) == k);
}

TEST_CASE("property: reparse(write(parse)) is identical and levels agree with topo") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = testsupport::random_aig(seed, 4 + seed % 5, 40 + seed);
    const auto back = parse_bench(write_bench(a));
    CHECK(structurally_equal(a, back));
    const auto lv = levelize(a);
    CHECK(lv == testsupport::relaxed_levels(a));
    std::vector<std::size_t> pos(a.size());
    for (std::size_t i = 0; i < a.topo.size(); ++i) pos[a.topo[i]] = i;
    for (NodeId v = 0; v < a.size(); ++v)
      for (auto u : a.nodes[v].fanins) {
        CHECK(pos[u] < pos[v]);
        CHECK(lv[u] < lv[v]);
      }
  }
}

TEST_CASE("property: parsing arbitrary bytes is total") {
  auto rng = make_rng(5, 0);
  const std::string alphabet = "INPUTOUTPUANDNOT()=,#\n abcxyz0123aag ";
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto len = uniform_index(rng, 80);
    for (std::uint64_t i = 0; i < len; ++i) text.push_back(alphabet[uniform_index(rng, alphabet.size())]);
    for (auto parse : {+[](const std::string& t) { (void)parse_bench(t); },
                       +[](const std::string& t) { (void)parse_aiger_ascii(t); }}) {
      try {
        parse(text);
      } catch (const Error&) {
      }
    }
  }
  CHECK(true);
}
