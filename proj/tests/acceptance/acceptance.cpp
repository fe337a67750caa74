// Acceptance suite: one PASS/FAIL line per criterion.
//
//   deepgate_acceptance [--only 1,2,...] [--workdir DIR] [--threads N]
//
// Criteria 6-9 train full-size models; their checkpoints and a results file
// are written to the work directory and reused by later criteria in the
// same run.

#include "deepgate/aig_transform.hpp"
#include "deepgate/error.hpp"
#include "deepgate/graph_prep.hpp"
#include "deepgate/model.hpp"
#include "deepgate/simulator.hpp"
#include "deepgate/train.hpp"

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace deepgate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

struct Context {
  fs::path workdir;
  unsigned threads = 1;
  nlohmann::json results = nlohmann::json::object();

  std::optional<Dataset> desk;
  std::map<std::string, DeepGateModel<float>> models;
  std::map<std::string, double> test_error;

  void log(const std::string& msg) const { std::cerr << "  " << msg << std::endl; }

  void save_results() const {
    std::ofstream out(workdir / "results.json");
    out << results.dump(2) << '\n';
  }

  const Dataset& desk_corpus() {
    if (!desk) {
      const auto t0 = std::chrono::steady_clock::now();
      CorpusConfig cc;
      cc.count = 1000;
      cc.seed = 1;
      cc.threads = threads;
      desk = split_dataset(build_synthetic_corpus(cc), 0.1, 1);
      std::size_t nodes = 0;
      std::uint32_t lo = 1000, hi = 0;
      std::size_t smin = 1 << 30, smax = 0;
      for (const auto& g : desk->graphs) {
        nodes += g.num_nodes();
        lo = std::min(lo, g.max_level);
        hi = std::max(hi, g.max_level);
        smin = std::min(smin, g.num_nodes());
        smax = std::max(smax, g.num_nodes());
      }
      log("desk corpus: " + std::to_string(desk->graphs.size()) + " graphs, " + std::to_string(nodes) +
          " nodes, sizes " + std::to_string(smin) + "-" + std::to_string(smax) + ", levels " + std::to_string(lo) +
          "-" + std::to_string(hi) + " (" +
          fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 3) + " s)");
      results["desk_corpus"] = {{"graphs", desk->graphs.size()}, {"nodes", nodes}, {"min_nodes", smin},
                                {"max_nodes", smax}, {"min_level", lo}, {"max_level", hi}};
    }
    return *desk;
  }

  /// Trains (once per run) a desk-scale model with the default schedule.
  const DeepGateModel<float>& desk_model(const std::string& key, Aggregator agg, bool skip) {
    if (auto it = models.find(key); it != models.end()) return it->second;
    const auto& ds = desk_corpus();
    ModelConfig mc;
    mc.aggregator = agg;
    mc.skip_connections = skip;
    TrainConfig tc;
    tc.threads = threads;
    tc.checkpoint_path = workdir / (key + ".ckpt");
    log("training " + key + " (" + std::to_string(tc.epochs) + " epochs)");
    const auto t0 = std::chrono::steady_clock::now();
    auto result = train(ds, mc, tc, [&](const EpochRecord& r) {
      if (r.epoch % 10 == 0 || r.epoch == 1)
        log(key + " epoch " + std::to_string(r.epoch) + " loss " + fmt(r.train_loss) + " test " +
            fmt(r.test_error.value_or(-1)));
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double err = avg_prediction_error(result.model, ds, Split::Test, {}, threads);
    test_error[key] = err;
    results["models"][key] = {{"test_error", err}, {"train_seconds", secs},
                              {"parameters", result.model.count_parameters()},
                              {"final_train_loss", result.report.epochs.back().train_loss}};
    save_results();
    std::ofstream tsv(workdir / (key + ".tsv"));
    result.report.write_tsv(tsv);
    return models.emplace(key, std::move(result.model)).first->second;
  }
};

// ---------------------------------------------------------------------------

Outcome criterion_1(Context&) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = testsupport::random_aig(seed, 4 + seed % 9, 60 + 4 * seed);
    const auto sampled = simulate(a, kDefaultPatterns, seed);
    const auto exact = testsupport::brute_force_probabilities(a);
    for (NodeId v = 0; v < a.size(); ++v) worst = std::max(worst, std::abs(sampled.prob[v] - exact[v]));
  }
  return {worst <= 0.01, "50 AIGs (<=12 PIs, <=256 nodes), max |sampled - exhaustive| = " + fmt(worst)};
}

Outcome criterion_2(Context&) {
  std::size_t ok = 0;
  std::set<GateKind> kinds;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cfg = GeneratorConfig::fixed(3 + seed % 10, 15 + seed % 40, 7000 + seed);
    cfg.max_fanin = 2 + seed % 3;
    cfg.mix = {{GateKind::And, 0.15}, {GateKind::Or, 0.15},  {GateKind::Nand, 0.15}, {GateKind::Nor, 0.15},
               {GateKind::Xor, 0.1},  {GateKind::Xnor, 0.1}, {GateKind::Not, 0.1},   {GateKind::Buf, 0.1}};
    const auto net = generate_random_circuit(cfg);
    for (const auto& n : net.nodes) kinds.insert(n.kind);
    const auto aig = strash(decompose(net));
    const bool lib = check_equivalence(net, aig, EquivalenceMode::exhaustive()).equivalent;
    const bool oracle = testsupport::outputs_equivalent(net, aig);
    ok += lib && oracle;
  }
  const bool all_kinds = kinds.size() == 9; // PI plus eight gate keywords
  return {ok == 100 && all_kinds, std::to_string(ok) + "/100 netlists equivalent after strash(decompose), " +
                                      std::to_string(kinds.size() - 1) + " gate kinds exercised"};
}

Outcome criterion_3(Context&) {
  auto checks = testsupport::op_grad_checks(120, 17);
  for (auto agg : {Aggregator::Attention, Aggregator::ConvSum, Aggregator::DeepSet, Aggregator::GatedSum})
    checks.push_back(testsupport::model_grad_check(agg, 150, 23));
  bool pass = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : checks) {
    pass = pass && c.probes >= 100 && c.max_rel <= 1e-4;
    if (c.max_rel >= worst) {
      worst = c.max_rel;
      worst_name = c.name;
    }
  }
  return {pass, std::to_string(checks.size()) + " checks (>=120 probes each), worst rel. error " + fmt(worst, 3) +
                    " (" + worst_name + ")"};
}

Outcome criterion_4(Context&) {
  double sum_dev = 0.0, perm_dev = 0.0;
  std::size_t bitwise = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = testsupport::random_aig(8000 + seed, 8, 150 + 10 * seed);
    const auto g = build_graph(a, simulate(a, 4096, seed));
    ModelConfig mc;
    mc.hidden = 32;
    mc.iterations = 3;
    mc.seed = seed;
    const DeepGateModel<double> model(mc);

    auto shuffled = g;
    auto rng = make_rng(seed, 11);
    shuffle(shuffled.edges, rng);
    shuffle(shuffled.skip_edges, rng);
    ForwardOptions opt;
    opt.record_attention = true;
    opt.record_messages = true;
    nn::Tape<double> t1(false), t2(false);
    const auto r1 = model.forward(t1, GraphBatch::from_graph(g), opt);
    const auto r2 = model.forward(t2, GraphBatch::from_graph(shuffled), opt);
    for (const auto& rec : r1.attention) {
      std::vector<double> total(rec.targets.size(), 0.0);
      for (std::size_t e = 0; e < rec.alpha.size(); ++e) total[rec.segment[e]] += rec.alpha[e];
      for (double s : total) sum_dev = std::max(sum_dev, std::abs(s - 1.0));
    }
    for (std::size_t i = 0; i < r1.messages.size(); ++i)
      perm_dev = std::max(perm_dev, (r1.messages[i].message - r2.messages[i].message).cwiseAbs().maxCoeff());

    ModelConfig off = mc;
    off.skip_connections = false;
    const DeepGateModel<float> plain(off);
    auto bare = g;
    bare.skip_edges.clear();
    bitwise += plain.predict(g) == plain.predict(bare);
  }
  const bool pass = sum_dev <= 1e-6 && perm_dev <= 1e-6 && bitwise == 20;
  return {pass, "max |sum alpha - 1| = " + fmt(sum_dev, 3) + ", max permutation deviation = " + fmt(perm_dev, 3) +
                    ", skip-off bitwise equal " + std::to_string(bitwise) + "/20"};
}

Outcome criterion_5(Context&) {
  const auto d = testsupport::diamond();
  const auto rec = detect_reconvergence(d);
  const bool diamond_ok = rec.size() == 1 && rec[0] == ReconvRecord{3, 6, 2};

  bool chains_ok = true;
  for (int len = 1; len <= 6; ++len) {
    std::vector<Node> nodes = {{GateKind::Pi, {}, "a"}, {GateKind::Pi, {}, "b"}, {GateKind::And, {0, 1}, {}}};
    for (int k = 0; k < len; ++k) nodes.push_back({GateKind::Not, {static_cast<NodeId>(nodes.size() - 1)}, {}});
    const auto chain = make_aig("chain", nodes, {static_cast<NodeId>(nodes.size() - 1)});
    chains_ok = chains_ok && detect_reconvergence(chain).empty();
  }

  std::size_t records = 0, bad = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = testsupport::random_aig(9000 + seed, 3 + seed % 6, 20 + seed);
    for (const auto& r : detect_reconvergence(a)) {
      ++records;
      const bool ok = r.distance == a.level[r.reconv] - a.level[r.stem] && r.distance >= 2 &&
                      testsupport::two_branches_reach(a, r.stem, r.reconv);
      bad += !ok;
    }
  }
  return {diamond_ok && chains_ok && bad == 0 && records > 0,
          std::string("diamond ") + (diamond_ok ? "ok" : "wrong") + ", chains " + (chains_ok ? "empty" : "non-empty") +
              ", " + std::to_string(records - bad) + "/" + std::to_string(records) +
              " records verified by path search on 100 AIGs"};
}

Outcome criterion_6(Context& ctx) {
  ctx.desk_model("attn_sc", Aggregator::Attention, true);
  ctx.desk_model("attn_nosc", Aggregator::Attention, false);
  ctx.desk_model("deepset", Aggregator::DeepSet, false);
  const double a = ctx.test_error.at("attn_sc"), b = ctx.test_error.at("attn_nosc"), c = ctx.test_error.at("deepset");
  const bool absolute = a <= 0.05;
  const bool order = a < b && b < c;
  return {absolute && order, "test error attn+SC " + fmt(a) + " (<= 0.05: " + (absolute ? "yes" : "no") +
                                 "), attn " + fmt(b) + ", deepset " + fmt(c) + " (ordered: " + (order ? "yes" : "no") +
                                 ")"};
}

Outcome criterion_7(Context& ctx) {
  const auto& model = ctx.desk_model("attn_sc", Aggregator::Attention, true);
  const std::vector<int> ts = {1, 10, 50};
  const auto m = t_sweep(model, ctx.desk_corpus(), Split::Test, ts, ctx.threads);
  ctx.results["t_sweep"] = {{"T", ts}, {"error", m}};
  ctx.save_results();
  const bool pass = std::abs(m[1] - m[2]) <= 0.005 && m[0] > m[1];
  return {pass, "metric T=1 " + fmt(m[0]) + ", T=10 " + fmt(m[1]) + ", T=50 " + fmt(m[2])};
}

std::vector<LabeledGraph> large_circuits(unsigned threads) {
  std::vector<Aig> cones;
  for (std::uint64_t parent = 0; cones.size() < 50; ++parent) {
    GeneratorConfig gen;
    gen.n_pi_min = 96;
    gen.n_pi_max = 192;
    gen.n_gates_min = 4000;
    gen.n_gates_max = 7000;
    gen.levels_min = 16;
    gen.levels_max = 24;
    gen.seed = 424242 + parent;
    const auto aig = strash(decompose(generate_random_circuit(gen)));
    try {
      for (auto& c : extract_subcircuits(aig, {2000, 5000}, 5, gen.seed, true)) {
        c.name = "large" + std::to_string(cones.size());
        cones.push_back(std::move(c));
        if (cones.size() == 50) break;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ExtractionExhausted) throw;
    }
  }
  return label_circuits(cones, kDefaultPatterns, 31, {}, threads);
}

Outcome criterion_8(Context& ctx) {
  const auto& model = ctx.desk_model("attn_sc", Aggregator::Attention, true);
  const double in_dist = ctx.test_error.at("attn_sc");
  const auto large = large_circuits(ctx.threads);
  std::vector<const LabeledGraph*> ptrs;
  std::size_t nodes = 0, lo = 1 << 30, hi = 0;
  for (const auto& g : large) {
    ptrs.push_back(&g);
    nodes += g.num_nodes();
    lo = std::min(lo, g.num_nodes());
    hi = std::max(hi, g.num_nodes());
  }
  const double err = avg_prediction_error(model, ptrs, {}, ctx.threads, 4);
  ctx.results["size_generalization"] = {{"graphs", large.size()}, {"nodes", nodes}, {"min_nodes", lo},
                                        {"max_nodes", hi}, {"error", err}, {"in_distribution", in_dist}};
  ctx.save_results();
  return {err <= 2 * in_dist, std::to_string(large.size()) + " circuits of " + std::to_string(lo) + "-" +
                                  std::to_string(hi) + " nodes: error " + fmt(err) + " vs 2 x " + fmt(in_dist) +
                                  " = " + fmt(2 * in_dist)};
}

Outcome criterion_9(Context& ctx) {
  GeneratorConfig gen;
  gen.n_pi_min = 8;
  gen.n_pi_max = 32;
  gen.n_gates_min = 20;
  gen.n_gates_max = 180;
  gen.max_fanin = 3;
  gen.seed = 5150;
  const auto nets = generate_circuits(gen, 300);
  std::vector<Aig> aigs;
  for (const auto& n : nets) {
    aigs.push_back(strash(decompose(n)));
    aigs.back().name = n.name;
  }
  const auto raw = split_dataset(label_netlists(nets, kDefaultPatterns, 3, 8, ctx.threads), 0.1, 2);
  const auto aig = split_dataset(label_circuits(aigs, kDefaultPatterns, 3, {}, ctx.threads), 0.1, 2);

  auto run = [&](const Dataset& ds, int width, const std::string& key) {
    ModelConfig mc;
    mc.feature_width = width;
    TrainConfig tc;
    tc.threads = ctx.threads;
    tc.checkpoint_path = ctx.workdir / (key + ".ckpt");
    ctx.log("training " + key);
    const auto r = train(ds, mc, tc);
    const double e = avg_prediction_error(r.model, ds, Split::Test, {}, ctx.threads);
    ctx.results["models"][key] = {{"test_error", e}, {"final_train_loss", r.report.epochs.back().train_loss}};
    ctx.save_results();
    return e;
  };
  const double e_raw = run(raw, 7, "ablation_raw");
  const double e_aig = run(aig, 3, "ablation_aig");
  return {e_aig <= e_raw, "300 circuits: AIG-trained " + fmt(e_aig) + " vs raw-trained " + fmt(e_raw)};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance criteria");
  std::vector<int> only;
  std::string workdir = (fs::temp_directory_path() / "deepgate_acceptance").string();
  unsigned threads = std::max(1U, std::thread::hardware_concurrency());
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 9));
  app.add_option("--workdir", workdir, "Directory for checkpoints and results");
  app.add_option("--threads", threads, "Worker threads for simulation and evaluation")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.workdir = workdir;
  ctx.threads = threads;
  fs::create_directories(ctx.workdir);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria = {
      {"simulation oracle agreement", criterion_1}, {"decomposition soundness", criterion_2},
      {"gradient fidelity", criterion_3},           {"attention invariants", criterion_4},
      {"reconvergence detection", criterion_5},     {"desk-scale training", criterion_6},
      {"T-convergence", criterion_7},               {"size generalization", criterion_8},
      {"transformation ablation", criterion_9}};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.results["criteria"][std::to_string(id)] = {{"pass", o.pass}, {"detail", o.detail}, {"seconds", secs}};
    ctx.save_results();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
              << " [" << fmt(secs, 3) << " s]" << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
