// deepgate: circuit conversion, labeling, dataset preparation, training and
// evaluation from the command line.

#include "deepgate/aig_transform.hpp"
#include "deepgate/circuit.hpp"
#include "deepgate/error.hpp"
#include "deepgate/graph_prep.hpp"
#include "deepgate/model.hpp"
#include "deepgate/simulator.hpp"
#include "deepgate/train.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace deepgate;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

/// Re-raises `e` with the file path in front of its message.
[[noreturn]] void rethrow_with_path(const Error& e, const fs::path& path) {
  std::string msg = e.what();
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
  throw Error(e.code(), path.string() + ": " + msg);
}

bool is_aiger(const fs::path& path) {
  return path.extension() == ".aag";
}

/// Parses a BENCH or ASCII AIGER file, prefixing parse errors with the path.
Netlist load_netlist(const fs::path& path) {
  const auto text = read_file(path);
  try {
    if (is_aiger(path)) return to_netlist(parse_aiger_ascii(text, path.stem().string()));
    return parse_bench(text, path.stem().string());
  } catch (const Error& e) {
    rethrow_with_path(e, path);
  }
}

/// Loads a circuit as an AIG, decomposing and hashing BENCH input.
Aig load_aig(const fs::path& path) {
  if (is_aiger(path)) {
    try {
      return parse_aiger_ascii(read_file(path), path.stem().string());
    } catch (const Error& e) {
      rethrow_with_path(e, path);
    }
  }
  return strash(decompose(load_netlist(path)));
}

std::vector<fs::path> circuit_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".bench" || ext == ".aag")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::EmptyDataset, "no .bench or .aag files in " + dir.string());
  return files;
}

std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::DomainError, "not an integer list: " + s);
    }
  }
  if (out.empty()) throw Error(ErrorCode::DomainError, "empty integer list");
  return out;
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw Error(ErrorCode::DomainError, "split must be train or test, got " + s);
}

struct SizeFlag {
  std::size_t min = 0;
  std::size_t max = 0;
};

SizeFlag parse_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const auto v = std::stoul(s);
      return {v, v};
    }
    SizeFlag r{std::stoul(s.substr(0, colon)), std::stoul(s.substr(colon + 1))};
    if (r.min > r.max) throw Error(ErrorCode::DomainError, "empty range " + s);
    return r;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::DomainError, "range must be N or MIN:MAX, got " + s);
  }
}

unsigned default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Commands

struct ConvertArgs {
  std::string in, out, check = "none";
  std::uint64_t patterns = kDefaultPatterns;
  std::uint64_t seed = 0;
};

int run_convert(const ConvertArgs& a) {
  const fs::path in(a.in), out(a.out);
  std::unique_ptr<Circuit> source;
  if (is_aiger(in)) {
    auto aig = parse_aiger_ascii(read_file(in), in.stem().string());
    if (is_aiger(out)) {
      write_file(out, write_aiger_ascii(aig));
    } else {
      write_file(out, write_bench(aig));
    }
    source = std::make_unique<Aig>(std::move(aig));
  } else {
    auto net = load_netlist(in);
    auto aig = strash(decompose(net));
    if (is_aiger(out))
      write_file(out, write_aiger_ascii(aig));
    else
      write_file(out, write_bench(aig));
    std::cerr << "converted " << net.num_gates() << " gates to " << aig.num_gates() << " AIG gates\n";
    source = std::make_unique<Netlist>(std::move(net));
  }
  if (a.check == "none") return 0;
  EquivalenceMode mode = a.check == "exhaustive" ? EquivalenceMode::exhaustive()
                                                 : EquivalenceMode::random(a.patterns, a.seed);
  // Re-read the written file so the check covers serialisation too.
  const Netlist written = load_netlist(out);
  const auto r = check_equivalence(*source, written, mode);
  if (!r.equivalent) {
    std::cerr << "NOT equivalent: output " << r.failing_output << " differs for";
    for (std::size_t i = 0; i < r.counterexample.size(); ++i)
      std::cerr << ' ' << r.input_names[i] << '=' << (r.counterexample[i] ? 1 : 0);
    std::cerr << '\n';
    return 2;
  }
  std::cerr << "equivalent (" << a.check << ", " << r.patterns_checked << " patterns)\n";
  return 0;
}

struct SimulateArgs {
  std::string in, out;
  std::uint64_t patterns = kDefaultPatterns;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  unsigned threads = 1;
};

int run_simulate(const SimulateArgs& a) {
  const auto aig = load_aig(a.in);
  const auto probs = a.exhaustive ? exhaustive_probabilities(aig) : simulate(aig, a.patterns, a.seed, a.threads);
  const auto names = node_names(aig);
  std::ostringstream out;
  out << "# generator " << probs.generator << "\n# seed " << probs.seed << "\n# patterns " << probs.n_patterns
      << "\nid\tname\tkind\tlevel\tones\tprob\n";
  for (NodeId v = 0; v < aig.size(); ++v)
    out << v << '\t' << names[v] << '\t' << to_string(aig.nodes[v].kind) << '\t' << aig.level[v] << '\t'
        << probs.ones[v] << '\t' << format_double(probs.prob[v], 8) << '\n';
  if (a.out.empty() || a.out == "-")
    std::cout << out.str();
  else
    write_file(a.out, out.str());
  return 0;
}

struct GenArgs {
  std::string out_dir;
  std::size_t count = 1;
  std::string pis = "8:64";
  std::string gates = "28:1500";
  std::uint64_t seed = 0;
  std::uint32_t max_fanin = 2;
  std::string depth;
};

int run_gen(const GenArgs& a) {
  GeneratorConfig cfg;
  const auto pis = parse_range(a.pis);
  const auto gates = parse_range(a.gates);
  cfg.n_pi_min = static_cast<std::uint32_t>(pis.min);
  cfg.n_pi_max = static_cast<std::uint32_t>(pis.max);
  cfg.n_gates_min = static_cast<std::uint32_t>(gates.min);
  cfg.n_gates_max = static_cast<std::uint32_t>(gates.max);
  cfg.max_fanin = a.max_fanin;
  if (!a.depth.empty()) {
    const auto depth = parse_range(a.depth);
    cfg.levels_min = static_cast<std::uint32_t>(depth.min);
    cfg.levels_max = static_cast<std::uint32_t>(depth.max);
  }
  cfg.seed = a.seed;
  const auto nets = generate_circuits(cfg, a.count);
  for (const auto& net : nets) write_file(fs::path(a.out_dir) / (net.name + ".bench"), write_bench(net));
  std::cerr << "wrote " << nets.size() << " netlists to " << a.out_dir << '\n';
  return 0;
}

struct ExtractArgs {
  std::string in, out_dir;
  std::size_t count = 10;
  std::string size = "36:500";
  std::uint64_t seed = 0;
  bool log_uniform = false;
};

int run_extract(const ExtractArgs& a) {
  const auto aig = load_aig(a.in);
  const auto range = parse_range(a.size);
  const auto cones = extract_subcircuits(aig, SizeRange{range.min, range.max}, a.count, a.seed, a.log_uniform);
  const auto stem = fs::path(a.in).stem().string();
  for (std::size_t i = 0; i < cones.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "_%04zu.aag", i);
    write_file(fs::path(a.out_dir) / (stem + name), write_aiger_ascii(cones[i]));
  }
  std::cerr << "wrote " << cones.size() << " sub-circuits to " << a.out_dir << '\n';
  return 0;
}

struct PrepArgs {
  std::string out, in_dir, source = "subcircuits", mode = "aig";
  std::size_t count = 1000;
  std::string size = "36:500";
  std::string levels = "3:24";
  std::string pis = "8:32";
  std::string gates = "30:250";
  std::uint64_t patterns = kDefaultPatterns;
  std::uint64_t seed = 1;
  double test_fraction = 0.1;
  int encoding_L = 8;
  unsigned threads = 1;
};

int run_prep(const PrepArgs& a) {
  const bool raw = a.mode == "raw";
  std::vector<LabeledGraph> graphs;
  nlohmann::json config = {{"mode", a.mode},        {"patterns", a.patterns}, {"seed", a.seed},
                           {"test_fraction", a.test_fraction}, {"encoding_L", a.encoding_L}};
  if (!a.in_dir.empty()) {
    config["source"] = "directory";
    std::vector<Netlist> nets;
    for (const auto& f : circuit_files(a.in_dir)) nets.push_back(load_netlist(f));
    if (raw) {
      graphs = label_netlists(nets, a.patterns, a.seed, a.encoding_L, a.threads);
    } else {
      std::vector<Aig> aigs;
      for (const auto& n : nets) aigs.push_back(strash(decompose(n)));
      graphs = label_circuits(aigs, a.patterns, a.seed, GraphConfig{FeatureMode::Aig, a.encoding_L}, a.threads);
    }
  } else if (a.source == "subcircuits") {
    if (raw) throw Error(ErrorCode::DomainError, "sub-circuit corpora are AIGs; use --source netlists for raw mode");
    CorpusConfig cc;
    cc.count = a.count;
    const auto size = parse_range(a.size);
    const auto lv = parse_range(a.levels);
    cc.size = SizeRange{size.min, size.max};
    cc.min_level = static_cast<std::uint32_t>(lv.min);
    cc.max_level = static_cast<std::uint32_t>(lv.max);
    cc.n_patterns = a.patterns;
    cc.seed = a.seed;
    cc.graph.encoding_L = a.encoding_L;
    cc.threads = a.threads;
    graphs = build_synthetic_corpus(cc);
    config.update({{"source", "subcircuits"}, {"count", a.count}, {"size", a.size}, {"levels", a.levels}});
  } else if (a.source == "netlists") {
    GeneratorConfig gen;
    const auto pis = parse_range(a.pis);
    const auto gates = parse_range(a.gates);
    gen.n_pi_min = static_cast<std::uint32_t>(pis.min);
    gen.n_pi_max = static_cast<std::uint32_t>(pis.max);
    gen.n_gates_min = static_cast<std::uint32_t>(gates.min);
    gen.n_gates_max = static_cast<std::uint32_t>(gates.max);
    gen.seed = a.seed;
    const auto nets = generate_circuits(gen, a.count);
    if (raw) {
      graphs = label_netlists(nets, a.patterns, a.seed, a.encoding_L, a.threads);
    } else {
      std::vector<Aig> aigs;
      for (const auto& n : nets) aigs.push_back(strash(decompose(n)));
      graphs = label_circuits(aigs, a.patterns, a.seed, GraphConfig{FeatureMode::Aig, a.encoding_L}, a.threads);
    }
    config.update({{"source", "netlists"}, {"count", a.count}, {"pis", a.pis}, {"gates", a.gates}});
  } else {
    throw Error(ErrorCode::DomainError, "unknown source " + a.source);
  }
  auto ds = split_dataset(std::move(graphs), a.test_fraction, a.seed);
  ds.config = config;
  save_dataset(a.out, ds);
  std::size_t nodes = 0;
  for (const auto& g : ds.graphs) nodes += g.num_nodes();
  std::cerr << "wrote " << ds.graphs.size() << " graphs (" << nodes << " nodes, "
            << ds.indices(Split::Train).size() << " train / " << ds.indices(Split::Test).size() << " test) to "
            << a.out << '\n';
  return 0;
}

struct TrainArgs {
  std::string data, out = "model.ckpt", report, resume;
  int epochs = 60;
  double lr = 1e-4;
  int d = 64;
  int T = 10;
  int L = 8;
  std::string aggregator = "attention";
  std::string skip = "on";
  std::size_t batch = 16;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;
  unsigned threads = 1;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  const auto ds = load_dataset(a.data);
  if (ds.graphs.empty()) throw Error(ErrorCode::EmptyDataset, a.data + " holds no graphs");
  ModelConfig mc;
  mc.hidden = a.d;
  mc.iterations = a.T;
  mc.encoding_L = a.L;
  mc.aggregator = aggregator_from_string(a.aggregator);
  mc.skip_connections = a.skip == "on";
  mc.feature_width = ds.graphs.front().feature_width();
  mc.seed = a.seed;
  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.lr = a.lr;
  tc.batch_size = a.batch;
  tc.seed = a.seed;
  tc.checkpoint_every = a.checkpoint_every;
  tc.checkpoint_path = a.out;
  tc.threads = a.threads;
  const auto progress = [&](const EpochRecord& r) {
    if (a.quiet) return;
    std::cerr << "epoch " << r.epoch << "  loss " << format_double(r.train_loss) << "  test "
              << (r.test_error ? format_double(*r.test_error) : std::string("NA")) << "  ("
              << format_double(r.seconds, 1) << " s)\n";
  };
  auto result = a.resume.empty() ? train(ds, mc, tc, progress) : resume(ds, a.resume, tc, progress);
  const auto report_path = a.report.empty() ? fs::path(a.out).replace_extension(".tsv") : fs::path(a.report);
  std::ostringstream tsv;
  result.report.write_tsv(tsv);
  write_file(report_path, tsv.str());
  write_file(fs::path(report_path).replace_extension(".json"), result.report.to_json().dump(2) + "\n");
  std::cerr << "checkpoint " << a.out << ", report " << report_path.string() << ", "
            << result.model.count_parameters() << " parameters\n";
  return 0;
}

struct EvalArgs {
  std::string ckpt, data, split = "test";
  int T = -1;
  unsigned threads = 1;
};

int run_eval(const EvalArgs& a) {
  const auto model = DeepGateModel<float>::load(fs::path(a.ckpt));
  const auto ds = load_dataset(a.data);
  std::optional<int> t;
  if (a.T >= 0) t = a.T;
  const double err = avg_prediction_error(model, ds, parse_split(a.split), t, a.threads);
  std::cout << "split\t" << a.split << "\nT\t" << t.value_or(model.config().iterations) << "\navg_prediction_error\t"
            << format_double(err, 8) << '\n';
  return 0;
}

struct SweepArgs {
  std::string ckpt, data, split = "test", Ts = "1,2,5,10,20,50", out;
  unsigned threads = 1;
};

int run_sweep(const SweepArgs& a) {
  const auto model = DeepGateModel<float>::load(fs::path(a.ckpt));
  const auto ds = load_dataset(a.data);
  const auto Ts = parse_int_list(a.Ts);
  const auto errs = t_sweep(model, ds, parse_split(a.split), Ts, a.threads);
  std::ostringstream out;
  out << "T\tavg_prediction_error\n";
  for (std::size_t i = 0; i < Ts.size(); ++i) out << Ts[i] << '\t' << format_double(errs[i], 8) << '\n';
  if (a.out.empty())
    std::cout << out.str();
  else
    write_file(a.out, out.str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepGate circuit representation toolkit"};
  app.require_subcommand(1);

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "BENCH <-> AIGER conversion through AIG decomposition");
  c->add_option("--in", convert.in, "Input .bench or .aag")->required()->check(CLI::ExistingFile);
  c->add_option("--out", convert.out, "Output .bench or .aag")->required();
  c->add_option("--check", convert.check, "Equivalence check")
      ->check(CLI::IsMember({"none", "exhaustive", "random"}));
  c->add_option("--patterns", convert.patterns, "Patterns for random checking");
  c->add_option("--seed", convert.seed, "Seed for random checking");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Per-node signal probabilities");
  s->add_option("--in", sim.in, "Input circuit")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "Label file (default stdout)");
  s->add_option("--patterns", sim.patterns, "Random patterns")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "Pattern seed");
  s->add_flag("--exhaustive", sim.exhaustive, "Enumerate all input assignments");
  sim.threads = default_threads();
  s->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Random netlists");
  g->add_option("--out-dir", gen.out_dir, "Output directory")->required();
  g->add_option("--count", gen.count, "Number of netlists");
  g->add_option("--pis", gen.pis, "PI count N or MIN:MAX");
  g->add_option("--gates", gen.gates, "Gate count N or MIN:MAX");
  g->add_option("--max-fanin", gen.max_fanin, "Largest gate arity")->check(CLI::Range(2, 8));
  g->add_option("--depth", gen.depth, "Levelled generation with depth N or MIN:MAX");
  g->add_option("--seed", gen.seed, "Seed");

  ExtractArgs ex;
  auto* e = app.add_subcommand("extract", "Sub-circuits by fan-in cone extraction");
  e->add_option("--in", ex.in, "Parent circuit")->required()->check(CLI::ExistingFile);
  e->add_option("--out-dir", ex.out_dir, "Output directory")->required();
  e->add_option("--count", ex.count, "Number of sub-circuits");
  e->add_option("--size", ex.size, "Node count N or MIN:MAX");
  e->add_flag("--log-uniform", ex.log_uniform, "Draw sizes log-uniformly");
  e->add_option("--seed", ex.seed, "Seed");

  PrepArgs prep;
  auto* p = app.add_subcommand("prep", "Build a labeled dataset file");
  p->add_option("--out", prep.out, "Dataset file")->required();
  p->add_option("--in-dir", prep.in_dir, "Directory of .bench/.aag circuits (instead of synthetic)")
      ->check(CLI::ExistingDirectory);
  p->add_option("--source", prep.source, "Synthetic source")->check(CLI::IsMember({"subcircuits", "netlists"}));
  p->add_option("--mode", prep.mode, "Feature mode")->check(CLI::IsMember({"aig", "raw"}));
  p->add_option("--count", prep.count, "Synthetic circuit count")->check(CLI::PositiveNumber);
  p->add_option("--size", prep.size, "Sub-circuit node range");
  p->add_option("--levels", prep.levels, "Sub-circuit level range");
  p->add_option("--pis", prep.pis, "Netlist PI range");
  p->add_option("--gates", prep.gates, "Netlist gate range");
  p->add_option("--patterns", prep.patterns, "Simulation patterns")->check(CLI::PositiveNumber);
  p->add_option("--seed", prep.seed, "Seed");
  p->add_option("--test-fraction", prep.test_fraction, "Test split fraction")->check(CLI::Range(0.0, 1.0));
  p->add_option("--L", prep.encoding_L, "Skip-edge encoding parameter")->check(CLI::PositiveNumber);
  prep.threads = default_threads();
  p->add_option("--threads", prep.threads, "Worker threads")->check(CLI::PositiveNumber);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--data", tr.data, "Dataset file")->required()->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Checkpoint path");
  t->add_option("--report", tr.report, "Report path (.tsv; a .json twin is written too)");
  t->add_option("--resume", tr.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  t->add_option("--epochs", tr.epochs, "Total epochs")->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr, "Learning rate")->check(CLI::PositiveNumber);
  t->add_option("--d", tr.d, "Hidden width")->check(CLI::PositiveNumber);
  t->add_option("--T", tr.T, "Iterations")->check(CLI::PositiveNumber);
  t->add_option("--L", tr.L, "Skip-edge encoding parameter")->check(CLI::PositiveNumber);
  t->add_option("--aggregator", tr.aggregator, "Aggregator")
      ->check(CLI::IsMember({"attention", "conv_sum", "deepset", "gated_sum"}));
  t->add_option("--skip", tr.skip, "Skip connections")->check(CLI::IsMember({"on", "off"}));
  t->add_option("--batch-size", tr.batch, "Circuits per batch")->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.seed, "Seed for initialisation and shuffling");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint cadence in epochs");
  tr.threads = default_threads();
  t->add_option("--threads", tr.threads, "Evaluation threads")->check(CLI::PositiveNumber);
  t->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "Average prediction error of a checkpoint");
  v->add_option("--ckpt", ev.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  v->add_option("--data", ev.data, "Dataset file")->required()->check(CLI::ExistingFile);
  v->add_option("--split", ev.split, "Split")->check(CLI::IsMember({"train", "test"}));
  v->add_option("--T", ev.T, "Inference iterations (default: training T)")->check(CLI::NonNegativeNumber);
  ev.threads = default_threads();
  v->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Error as a function of inference iterations");
  w->add_option("--ckpt", sw.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  w->add_option("--data", sw.data, "Dataset file")->required()->check(CLI::ExistingFile);
  w->add_option("--split", sw.split, "Split")->check(CLI::IsMember({"train", "test"}));
  w->add_option("--T", sw.Ts, "Comma-separated iteration counts");
  w->add_option("--out", sw.out, "Table path (default stdout)");
  sw.threads = default_threads();
  w->add_option("--threads", sw.threads, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c->parsed()) return run_convert(convert);
    if (s->parsed()) return run_simulate(sim);
    if (g->parsed()) return run_gen(gen);
    if (e->parsed()) return run_extract(ex);
    if (p->parsed()) return run_prep(prep);
    if (t->parsed()) return run_train(tr);
    if (v->parsed()) return run_eval(ev);
    if (w->parsed()) return run_sweep(sw);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
