#include "deepgate/circuit.hpp"

#include "deepgate/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace deepgate {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool valid_signal_name(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')' || ch == ',' ||
        ch == '=' || ch == '#')
      return false;
  }
  return true;
}

} // namespace

std::string_view to_string(GateKind kind) {
  switch (kind) {
  case GateKind::Pi: return "PI";
  case GateKind::And: return "AND";
  case GateKind::Or: return "OR";
  case GateKind::Nand: return "NAND";
  case GateKind::Nor: return "NOR";
  case GateKind::Xor: return "XOR";
  case GateKind::Xnor: return "XNOR";
  case GateKind::Not: return "NOT";
  case GateKind::Buf: return "BUF";
  }
  return "?";
}

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
  const auto u = upper(name);
  if (u == "AND") return GateKind::And;
  if (u == "OR") return GateKind::Or;
  if (u == "NAND") return GateKind::Nand;
  if (u == "NOR") return GateKind::Nor;
  if (u == "XOR") return GateKind::Xor;
  if (u == "XNOR") return GateKind::Xnor;
  if (u == "NOT" || u == "INV") return GateKind::Not;
  if (u == "BUF" || u == "BUFF") return GateKind::Buf;
  return std::nullopt;
}

int feature_width(FeatureMode mode) { return mode == FeatureMode::Aig ? 3 : 7; }

std::optional<int> feature_index(GateKind kind, FeatureMode mode) {
  if (mode == FeatureMode::Aig) {
    switch (kind) {
    case GateKind::Pi: return 0;
    case GateKind::And: return 1;
    case GateKind::Not: return 2;
    default: return std::nullopt;
    }
  }
  switch (kind) {
  case GateKind::Pi: return 0;
  case GateKind::And: return 1;
  case GateKind::Or: return 2;
  case GateKind::Nand: return 3;
  case GateKind::Nor: return 4;
  case GateKind::Xor: return 5;
  case GateKind::Not: return 6;
  default: return std::nullopt;
  }
}

GateKind kind_from_feature(int index, FeatureMode mode) {
  static constexpr GateKind aig[] = {GateKind::Pi, GateKind::And, GateKind::Not};
  static constexpr GateKind raw[] = {GateKind::Pi,  GateKind::And, GateKind::Or, GateKind::Nand,
                                     GateKind::Nor, GateKind::Xor, GateKind::Not};
  if (index < 0 || index >= feature_width(mode))
    throw Error(ErrorCode::DomainError, "feature index " + std::to_string(index) + " out of range");
  return mode == FeatureMode::Aig ? aig[index] : raw[index];
}

std::vector<NodeId> Circuit::inputs() const {
  std::vector<NodeId> pis;
  for (NodeId v = 0; v < nodes.size(); ++v)
    if (nodes[v].kind == GateKind::Pi) pis.push_back(v);
  return pis;
}

std::size_t Circuit::num_inputs() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const Node& n) { return n.kind == GateKind::Pi; }));
}

std::uint32_t Aig::max_level() const {
  return level.empty() ? 0 : *std::max_element(level.begin(), level.end());
}

std::vector<std::vector<NodeId>> fanout_lists(std::span<const Node> nodes) {
  std::vector<std::vector<NodeId>> fo(nodes.size());
  for (NodeId v = 0; v < nodes.size(); ++v)
    for (NodeId u : nodes[v].fanins) fo[u].push_back(v);
  return fo;
}

std::vector<NodeId> topo_order(std::span<const Node> nodes) {
  const auto n = nodes.size();
  std::vector<std::uint32_t> pending(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : nodes[v].fanins) {
      if (u >= n)
        throw Error(ErrorCode::UndefinedSignal,
                    "node " + std::to_string(v) + " references missing node " + std::to_string(u));
    }
    pending[v] = static_cast<std::uint32_t>(nodes[v].fanins.size());
  }
  const auto fo = fanout_lists(nodes);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId v = 0; v < n; ++v)
    if (pending[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (NodeId w : fo[order[head]])
      if (--pending[w] == 0) order.push_back(w);
  }
  if (order.size() != n) {
    NodeId culprit = 0;
    for (NodeId v = 0; v < n; ++v)
      if (pending[v] != 0) {
        culprit = v;
        break;
      }
    const auto& nm = nodes[culprit].name;
    throw Error(ErrorCode::CycleDetected,
                "combinational cycle through " + (nm.empty() ? "node " + std::to_string(culprit) : nm));
  }
  return order;
}

std::vector<std::uint32_t> levelize(std::span<const Node> nodes) {
  std::vector<std::uint32_t> level(nodes.size(), 0);
  for (NodeId v : topo_order(nodes)) {
    std::uint32_t lv = 0;
    for (NodeId u : nodes[v].fanins) lv = std::max(lv, level[u] + 1);
    level[v] = lv;
  }
  return level;
}

void validate(const Netlist& netlist) {
  const auto& nodes = netlist.nodes;
  std::size_t pis = 0;
  for (NodeId v = 0; v < nodes.size(); ++v) {
    const auto& node = nodes[v];
    const auto arity = node.fanins.size();
    for (NodeId u : node.fanins)
      if (u >= nodes.size())
        throw Error(ErrorCode::UndefinedSignal, "node " + std::to_string(v) + " references missing node");
    switch (node.kind) {
    case GateKind::Pi:
      ++pis;
      if (arity != 0) throw Error(ErrorCode::InvalidStructure, "PI with fanins");
      break;
    case GateKind::Not:
    case GateKind::Buf:
      if (arity != 1)
        throw Error(ErrorCode::InvalidStructure, std::string(to_string(node.kind)) + " needs exactly 1 input");
      break;
    default:
      if (arity < 2)
        throw Error(ErrorCode::InvalidStructure, std::string(to_string(node.kind)) + " needs at least 2 inputs");
    }
  }
  if (pis == 0) throw Error(ErrorCode::NoPrimaryInputs, "netlist has no primary inputs");
  for (NodeId o : netlist.outputs)
    if (o >= nodes.size()) throw Error(ErrorCode::UndefinedSignal, "output references missing node");
  (void)topo_order(nodes);
}

Aig make_aig(std::string name, std::vector<Node> nodes, std::vector<NodeId> outputs) {
  for (NodeId v = 0; v < nodes.size(); ++v) {
    const auto& node = nodes[v];
    const auto arity = node.fanins.size();
    bool ok = false;
    switch (node.kind) {
    case GateKind::Pi: ok = arity == 0; break;
    case GateKind::And: ok = arity == 2; break;
    case GateKind::Not: ok = arity == 1; break;
    default:
      throw Error(ErrorCode::UnsupportedGateKind,
                  std::string(to_string(node.kind)) + " node " + std::to_string(v) + " in AIG");
    }
    if (!ok)
      throw Error(ErrorCode::InvalidStructure,
                  std::string(to_string(node.kind)) + " node " + std::to_string(v) + " has wrong arity");
  }
  for (NodeId o : outputs)
    if (o >= nodes.size()) throw Error(ErrorCode::UndefinedSignal, "output references missing node");
  Aig aig;
  aig.name = std::move(name);
  aig.nodes = std::move(nodes);
  aig.outputs = std::move(outputs);
  aig.topo = topo_order(aig.nodes);
  aig.level.assign(aig.nodes.size(), 0);
  for (NodeId v : aig.topo) {
    std::uint32_t lv = 0;
    for (NodeId u : aig.nodes[v].fanins) lv = std::max(lv, aig.level[u] + 1);
    aig.level[v] = lv;
  }
  return aig;
}

Netlist to_netlist(const Aig& aig) {
  Netlist n;
  n.name = aig.name;
  n.nodes = aig.nodes;
  n.outputs = aig.outputs;
  return n;
}

std::vector<std::string> node_names(const Circuit& circuit) {
  std::vector<std::string> names(circuit.size());
  std::unordered_set<std::string> taken;
  for (const auto& node : circuit.nodes)
    if (!node.name.empty()) taken.insert(node.name);
  std::unordered_set<std::string> used;
  for (NodeId v = 0; v < circuit.size(); ++v) {
    std::string nm = circuit.nodes[v].name;
    if (nm.empty() || used.contains(nm)) {
      nm = "n" + std::to_string(v);
      while (taken.contains(nm) || used.contains(nm)) nm += "_";
    }
    used.insert(nm);
    names[v] = std::move(nm);
  }
  return names;
}

// ---------------------------------------------------------------------------
// BENCH

Netlist parse_bench(std::string_view text, std::string name) {
  struct PendingGate {
    NodeId id;
    std::vector<std::string> inputs;
    std::size_t line;
  };
  Netlist netlist;
  netlist.name = std::move(name);
  std::unordered_map<std::string, NodeId> ids;
  std::vector<PendingGate> gates;
  std::vector<std::pair<std::string, std::size_t>> outputs;

  const auto define = [&](const std::string& sig, GateKind kind, std::size_t line) {
    if (!valid_signal_name(sig)) throw ParseError(ErrorCode::SyntaxError, line, "bad signal name '" + sig + "'");
    if (ids.contains(sig))
      throw ParseError(ErrorCode::DuplicateDefinition, line, "signal '" + sig + "' defined twice");
    const auto id = static_cast<NodeId>(netlist.nodes.size());
    ids.emplace(sig, id);
    netlist.nodes.push_back(Node{kind, {}, sig});
    return id;
  };

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto open = line.find('(');
    const auto close = line.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
        !trim(line.substr(close + 1)).empty())
      throw ParseError(ErrorCode::SyntaxError, lineno, "expected KEYWORD(...) or name = GATE(...)");
    const auto args_text = line.substr(open + 1, close - open - 1);
    std::vector<std::string> args;
    {
      std::size_t start = 0;
      while (true) {
        auto comma = args_text.find(',', start);
        auto arg = trim(args_text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start));
        if (!arg.empty() || comma != std::string_view::npos) args.emplace_back(arg);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    for (const auto& a : args)
      if (!valid_signal_name(a)) throw ParseError(ErrorCode::SyntaxError, lineno, "bad argument '" + a + "'");

    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq > open) {
      const auto keyword = upper(trim(line.substr(0, open)));
      if (args.size() != 1)
        throw ParseError(ErrorCode::SyntaxError, lineno, keyword + " takes exactly one signal");
      if (keyword == "INPUT") {
        define(args[0], GateKind::Pi, lineno);
      } else if (keyword == "OUTPUT") {
        outputs.emplace_back(args[0], lineno);
      } else {
        throw ParseError(ErrorCode::SyntaxError, lineno, "unknown declaration '" + keyword + "'");
      }
      continue;
    }

    const std::string target(trim(line.substr(0, eq)));
    const auto gate_name = trim(line.substr(eq + 1, open - eq - 1));
    const auto kind = gate_kind_from_name(gate_name);
    if (!kind)
      throw ParseError(ErrorCode::UnsupportedGateKind, lineno, "gate type '" + std::string(gate_name) + "'");
    const auto arity = args.size();
    if ((*kind == GateKind::Not || *kind == GateKind::Buf) && arity != 1)
      throw ParseError(ErrorCode::SyntaxError, lineno, std::string(to_string(*kind)) + " takes one input");
    if (*kind != GateKind::Not && *kind != GateKind::Buf && arity < 2)
      throw ParseError(ErrorCode::SyntaxError, lineno, std::string(to_string(*kind)) + " takes at least two inputs");
    const auto id = define(target, *kind, lineno);
    gates.push_back(PendingGate{id, std::move(args), lineno});
  }

  for (auto& g : gates) {
    auto& fanins = netlist.nodes[g.id].fanins;
    for (const auto& sig : g.inputs) {
      auto it = ids.find(sig);
      if (it == ids.end())
        throw ParseError(ErrorCode::UndefinedSignal, g.line, "signal '" + sig + "' is never defined");
      fanins.push_back(it->second);
    }
  }
  for (const auto& [sig, lineno] : outputs) {
    auto it = ids.find(sig);
    if (it == ids.end())
      throw ParseError(ErrorCode::UndefinedSignal, lineno, "output '" + sig + "' is never defined");
    netlist.outputs.push_back(it->second);
  }
  (void)topo_order(netlist.nodes);
  if (netlist.num_inputs() == 0) throw Error(ErrorCode::NoPrimaryInputs, "no INPUT declarations");
  return netlist;
}

std::string write_bench(const Circuit& circuit) {
  const auto names = node_names(circuit);
  std::ostringstream out;
  if (!circuit.name.empty()) out << "# " << circuit.name << "\n";
  for (NodeId v = 0; v < circuit.size(); ++v)
    if (circuit.nodes[v].kind == GateKind::Pi) out << "INPUT(" << names[v] << ")\n";
  for (NodeId o : circuit.outputs) out << "OUTPUT(" << names[o] << ")\n";
  for (NodeId v = 0; v < circuit.size(); ++v) {
    const auto& node = circuit.nodes[v];
    if (node.kind == GateKind::Pi) continue;
    out << names[v] << " = " << to_string(node.kind) << "(";
    for (std::size_t i = 0; i < node.fanins.size(); ++i) out << (i ? ", " : "") << names[node.fanins[i]];
    out << ")\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// AIGER ASCII

namespace {

std::vector<std::uint64_t> parse_uints(std::string_view line, std::size_t lineno) {
  std::vector<std::uint64_t> values;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + line.size(), v);
    if (ec != std::errc() || (ptr != line.data() + line.size() && *ptr != ' '))
      throw ParseError(ErrorCode::SyntaxError, lineno, "expected unsigned integers");
    pos = static_cast<std::size_t>(ptr - line.data());
    values.push_back(v);
  }
  return values;
}

} // namespace

Aig parse_aiger_ascii(std::string_view text, std::string name) {
  const auto lines = split_lines(text);
  std::size_t cursor = 0;
  const auto next_line = [&](const char* what) -> std::pair<std::string_view, std::size_t> {
    if (cursor >= lines.size())
      throw ParseError(ErrorCode::SyntaxError, lines.size(), std::string("unexpected end of file, expected ") + what);
    auto line = trim(lines[cursor]);
    ++cursor;
    return {line, cursor};
  };

  auto [header, header_line] = next_line("header");
  if (header.substr(0, 4) != "aag ")
    throw ParseError(ErrorCode::MalformedHeader, header_line, "expected 'aag M I L O A'");
  std::vector<std::uint64_t> h;
  try {
    h = parse_uints(header.substr(4), header_line);
  } catch (const ParseError&) {
    throw ParseError(ErrorCode::MalformedHeader, header_line, "non-numeric header field");
  }
  if (h.size() < 5) throw ParseError(ErrorCode::MalformedHeader, header_line, "expected 5 header fields");
  for (std::size_t k = 5; k < h.size(); ++k)
    if (h[k] != 0) throw ParseError(ErrorCode::LatchesUnsupported, header_line, "sequential AIGER extensions");
  const auto max_var = h[0], num_in = h[1], num_latch = h[2], num_out = h[3], num_and = h[4];
  if (num_latch > 0) throw ParseError(ErrorCode::LatchesUnsupported, header_line, "latches are not supported");
  if (num_in + num_and > max_var)
    throw ParseError(ErrorCode::MalformedHeader, header_line, "M smaller than I + L + A");
  if (max_var > (1ULL << 31)) throw ParseError(ErrorCode::MalformedHeader, header_line, "M too large");

  std::vector<Node> nodes;
  constexpr auto kNone = static_cast<NodeId>(-1);
  std::vector<NodeId> var_node(max_var + 1, kNone);
  std::vector<std::size_t> var_line(max_var + 1, 0);

  const auto check_lit = [&](std::uint64_t lit, std::size_t lineno) {
    if (lit > 2 * max_var + 1)
      throw ParseError(ErrorCode::LiteralOutOfRange, lineno, "literal " + std::to_string(lit));
  };
  const auto declare = [&](std::uint64_t lit, std::size_t lineno, GateKind kind) {
    check_lit(lit, lineno);
    if (lit & 1U) throw ParseError(ErrorCode::SyntaxError, lineno, "definition literal must be even");
    if (lit < 2) throw ParseError(ErrorCode::SyntaxError, lineno, "cannot redefine a constant");
    const auto var = lit / 2;
    if (var_node[var] != kNone)
      throw ParseError(ErrorCode::DuplicateDefinition, lineno, "variable " + std::to_string(var) + " defined twice");
    var_node[var] = static_cast<NodeId>(nodes.size());
    var_line[var] = lineno;
    nodes.push_back(Node{kind, {}, {}});
  };

  for (std::uint64_t i = 0; i < num_in; ++i) {
    auto [line, lineno] = next_line("input literal");
    const auto vals = parse_uints(line, lineno);
    if (vals.size() != 1) throw ParseError(ErrorCode::SyntaxError, lineno, "expected one input literal");
    declare(vals[0], lineno, GateKind::Pi);
  }
  std::vector<std::pair<std::uint64_t, std::size_t>> out_lits;
  for (std::uint64_t i = 0; i < num_out; ++i) {
    auto [line, lineno] = next_line("output literal");
    const auto vals = parse_uints(line, lineno);
    if (vals.size() != 1) throw ParseError(ErrorCode::SyntaxError, lineno, "expected one output literal");
    check_lit(vals[0], lineno);
    out_lits.emplace_back(vals[0], lineno);
  }
  struct AndLine {
    NodeId id;
    std::uint64_t rhs0, rhs1;
    std::size_t line;
  };
  std::vector<AndLine> ands;
  for (std::uint64_t i = 0; i < num_and; ++i) {
    auto [line, lineno] = next_line("and gate");
    const auto vals = parse_uints(line, lineno);
    if (vals.size() != 3) throw ParseError(ErrorCode::SyntaxError, lineno, "expected 'lhs rhs0 rhs1'");
    declare(vals[0], lineno, GateKind::And);
    check_lit(vals[1], lineno);
    check_lit(vals[2], lineno);
    ands.push_back(AndLine{static_cast<NodeId>(nodes.size() - 1), vals[1], vals[2], lineno});
  }

  std::unordered_map<NodeId, NodeId> not_of;
  const auto resolve = [&](std::uint64_t lit, std::size_t lineno) -> NodeId {
    if (lit < 2) throw ParseError(ErrorCode::UnsupportedGateKind, lineno, "constant literals are not supported");
    const auto var = lit / 2;
    const auto driver = var_node[var];
    if (driver == kNone)
      throw ParseError(ErrorCode::UndefinedSignal, lineno, "variable " + std::to_string(var) + " is never defined");
    if ((lit & 1U) == 0) return driver;
    auto [it, inserted] = not_of.try_emplace(driver, static_cast<NodeId>(nodes.size()));
    if (inserted) nodes.push_back(Node{GateKind::Not, {driver}, {}});
    return it->second;
  };
  for (const auto& a : ands) {
    const auto f0 = resolve(a.rhs0, a.line);
    const auto f1 = resolve(a.rhs1, a.line);
    nodes[a.id].fanins = {f0, f1};
  }
  std::vector<NodeId> outputs;
  for (const auto& [lit, lineno] : out_lits) outputs.push_back(resolve(lit, lineno));

  // Symbol table and comments.
  const auto pis_by_order = [&] {
    std::vector<NodeId> pis;
    for (NodeId v = 0; v < nodes.size(); ++v)
      if (nodes[v].kind == GateKind::Pi) pis.push_back(v);
    return pis;
  }();
  while (cursor < lines.size()) {
    auto [line, lineno] = next_line("symbol");
    if (line.empty()) continue;
    if (line == "c" || line.substr(0, 2) == "c ") break;
    const auto space = line.find(' ');
    if (space == std::string_view::npos || space < 2)
      throw ParseError(ErrorCode::SyntaxError, lineno, "bad symbol table entry");
    const char type = line[0];
    std::uint64_t pos = 0;
    auto [ptr, ec] = std::from_chars(line.data() + 1, line.data() + space, pos);
    if (ec != std::errc() || ptr != line.data() + space)
      throw ParseError(ErrorCode::SyntaxError, lineno, "bad symbol index");
    const std::string sym(trim(line.substr(space + 1)));
    if (type == 'i') {
      if (pos >= pis_by_order.size()) throw ParseError(ErrorCode::LiteralOutOfRange, lineno, "input symbol index");
      nodes[pis_by_order[pos]].name = sym;
    } else if (type == 'o') {
      if (pos >= outputs.size()) throw ParseError(ErrorCode::LiteralOutOfRange, lineno, "output symbol index");
      auto& target = nodes[outputs[pos]];
      if (target.name.empty() && target.kind != GateKind::Pi) target.name = sym;
    } else if (type == 'l') {
      throw ParseError(ErrorCode::LatchesUnsupported, lineno, "latch symbol");
    } else {
      throw ParseError(ErrorCode::SyntaxError, lineno, "unknown symbol type");
    }
  }
  return make_aig(std::move(name), std::move(nodes), std::move(outputs));
}

std::string write_aiger_ascii(const Aig& aig) {
  const auto n = aig.size();
  std::vector<std::uint64_t> lit(n, 0);
  std::vector<NodeId> pis, ands;
  for (NodeId v = 0; v < n; ++v)
    if (aig.nodes[v].kind == GateKind::Pi) pis.push_back(v);
  for (NodeId v : aig.topo)
    if (aig.nodes[v].kind == GateKind::And) ands.push_back(v);
  std::uint64_t var = 0;
  for (NodeId v : pis) lit[v] = 2 * (++var);
  for (NodeId v : ands) lit[v] = 2 * (++var);
  for (NodeId v : aig.topo) {
    const auto& node = aig.nodes[v];
    if (node.kind == GateKind::Not) lit[v] = lit[node.fanins[0]] ^ 1U;
    else if (node.kind != GateKind::Pi && node.kind != GateKind::And)
      throw Error(ErrorCode::UnsupportedGateKind, "AIGER writer accepts PI/AND/NOT only");
  }
  std::ostringstream out;
  out << "aag " << var << ' ' << pis.size() << " 0 " << aig.outputs.size() << ' ' << ands.size() << '\n';
  for (NodeId v : pis) out << lit[v] << '\n';
  for (NodeId o : aig.outputs) out << lit[o] << '\n';
  for (NodeId v : ands) {
    const auto& f = aig.nodes[v].fanins;
    out << lit[v] << ' ' << lit[f[0]] << ' ' << lit[f[1]] << '\n';
  }
  for (std::size_t i = 0; i < pis.size(); ++i)
    if (!aig.nodes[pis[i]].name.empty()) out << 'i' << i << ' ' << aig.nodes[pis[i]].name << '\n';
  for (std::size_t i = 0; i < aig.outputs.size(); ++i) {
    const auto& node = aig.nodes[aig.outputs[i]];
    if (!node.name.empty() && node.kind != GateKind::Pi) out << 'o' << i << ' ' << node.name << '\n';
  }
  if (!aig.name.empty()) out << "c\n" << aig.name << '\n';
  return out.str();
}

bool structurally_equal(const Circuit& a, const Circuit& b) {
  if (a.size() != b.size() || a.outputs.size() != b.outputs.size()) return false;
  const auto pa = a.inputs();
  const auto pb = b.inputs();
  if (pa.size() != pb.size()) return false;
  constexpr auto kNone = static_cast<NodeId>(-1);
  std::vector<NodeId> ab(a.size(), kNone), ba(b.size(), kNone);
  std::vector<std::pair<NodeId, NodeId>> stack;
  for (std::size_t i = 0; i < pa.size(); ++i) stack.emplace_back(pa[i], pb[i]);
  for (std::size_t i = 0; i < a.outputs.size(); ++i) stack.emplace_back(a.outputs[i], b.outputs[i]);
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (ab[x] != kNone || ba[y] != kNone) {
      if (ab[x] != y || ba[y] != x) return false;
      continue;
    }
    const auto& nx = a.nodes[x];
    const auto& ny = b.nodes[y];
    if (nx.kind != ny.kind || nx.fanins.size() != ny.fanins.size()) return false;
    ab[x] = y;
    ba[y] = x;
    for (std::size_t k = 0; k < nx.fanins.size(); ++k) stack.emplace_back(nx.fanins[k], ny.fanins[k]);
  }
  return std::find(ab.begin(), ab.end(), kNone) == ab.end();
}

} // namespace deepgate
