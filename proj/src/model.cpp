#include "deepgate/model.hpp"

#include "deepgate/error.hpp"
#include "deepgate/random.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace deepgate {

using nn::Index;
using nn::Matrix;
using nn::RowRef;
using nn::Tape;
using nn::Value;

std::string_view to_string(Aggregator a) {
  switch (a) {
    case Aggregator::Attention: return "attention";
    case Aggregator::ConvSum: return "conv_sum";
    case Aggregator::DeepSet: return "deepset";
    case Aggregator::GatedSum: return "gated_sum";
  }
  return "unknown";
}

Aggregator aggregator_from_string(std::string_view s) {
  for (auto a : {Aggregator::Attention, Aggregator::ConvSum, Aggregator::DeepSet, Aggregator::GatedSum})
    if (to_string(a) == s) return a;
  throw Error(ErrorCode::DomainError, "unknown aggregator '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (hidden <= 0 || iterations <= 0 || encoding_L <= 0 || regressor_hidden <= 0)
    throw Error(ErrorCode::DomainError, "hidden, iterations, encoding_L and regressor_hidden must be positive");
  if (feature_width != 3 && feature_width != 7)
    throw Error(ErrorCode::DomainError, "feature width must be 3 or 7, got " + std::to_string(feature_width));
  if (aggregator == Aggregator::DeepSet && hidden < 2)
    throw Error(ErrorCode::DomainError, "deepset needs hidden >= 2");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"hidden", hidden},
          {"iterations", iterations},
          {"encoding_L", encoding_L},
          {"aggregator", std::string(to_string(aggregator))},
          {"skip_connections", skip_connections},
          {"feature_width", feature_width},
          {"regressor_hidden", regressor_hidden},
          {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.hidden = j.at("hidden").get<int>();
    c.iterations = j.at("iterations").get<int>();
    c.encoding_L = j.at("encoding_L").get<int>();
    c.aggregator = aggregator_from_string(j.at("aggregator").get<std::string>());
    c.skip_connections = j.at("skip_connections").get<bool>();
    c.feature_width = j.at("feature_width").get<int>();
    c.regressor_hidden = j.at("regressor_hidden").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("model config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Batches

GraphBatch GraphBatch::from_graphs(std::span<const LabeledGraph* const> graphs) {
  if (graphs.empty()) throw Error(ErrorCode::EmptyDataset, "batch of zero graphs");
  GraphBatch b;
  b.feature_width = graphs[0]->feature_width();
  b.encoding_L = graphs[0]->encoding_L;
  std::size_t total = 0;
  for (const auto* g : graphs) {
    if (g->feature_width() != b.feature_width || g->encoding_L != b.encoding_L)
      throw Error(ErrorCode::ConfigMismatch, "graphs in a batch must share feature mode and encoding width");
    b.offsets.push_back(total);
    total += g->num_nodes();
  }
  b.offsets.push_back(total);
  b.num_nodes = total;
  b.feature.reserve(total);
  b.label.reserve(total);
  b.level.reserve(total);
  b.preds.resize(total);
  b.succs.resize(total);
  b.skip_in.resize(total);
  b.skip_out.resize(total);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto& g = *graphs[k];
    const auto off = static_cast<NodeId>(b.offsets[k]);
    if (g.label.size() != g.num_nodes() || g.level.size() != g.num_nodes())
      throw Error(ErrorCode::LengthMismatch, "graph " + g.name + " has inconsistent array lengths");
    b.feature.insert(b.feature.end(), g.feature.begin(), g.feature.end());
    b.label.insert(b.label.end(), g.label.begin(), g.label.end());
    b.level.insert(b.level.end(), g.level.begin(), g.level.end());
    for (const auto& [u, v] : g.edges) {
      b.preds[off + v].push_back(off + u);
      b.succs[off + u].push_back(off + v);
    }
    for (const auto& s : g.skip_edges) {
      const auto idx = static_cast<std::uint32_t>(b.skips.size());
      b.skips.push_back(SkipEdge{off + s.stem, off + s.reconv, s.distance, s.attr});
      b.skip_in[off + s.reconv].push_back(idx);
      b.skip_out[off + s.stem].push_back(idx);
    }
  }
  std::uint32_t max_level = 0;
  for (auto l : b.level) max_level = std::max(max_level, l);
  b.levels.resize(total == 0 ? 0 : max_level + 1);
  for (NodeId v = 0; v < total; ++v) b.levels[b.level[v]].push_back(v);
  return b;
}

GraphBatch GraphBatch::from_graph(const LabeledGraph& graph) {
  const LabeledGraph* one[] = {&graph};
  return from_graphs(one);
}

// ---------------------------------------------------------------------------
// Model

namespace {

/// Sources feeding one level group of one layer.
struct GroupPlan {
  std::vector<NodeId> targets;
  std::vector<NodeId> sources;
  std::vector<std::uint32_t> segment;
  std::vector<std::int32_t> skip; // index into batch.skips or -1
  bool any_skip = false;
};

std::vector<GroupPlan> plan_layer(const GraphBatch& b, Direction dir, bool use_skip) {
  std::vector<GroupPlan> plans;
  const std::size_t n_levels = b.levels.size();
  for (std::size_t k = 0; k < n_levels; ++k) {
    const std::size_t l = dir == Direction::Forward ? k : n_levels - 1 - k;
    GroupPlan p;
    for (NodeId v : b.levels[l]) {
      const auto& plain = dir == Direction::Forward ? b.preds[v] : b.succs[v];
      const auto& extra = dir == Direction::Forward ? b.skip_in[v] : b.skip_out[v];
      if (plain.empty() && (!use_skip || extra.empty())) continue;
      const auto seg = static_cast<std::uint32_t>(p.targets.size());
      p.targets.push_back(v);
      for (NodeId u : plain) {
        p.sources.push_back(u);
        p.segment.push_back(seg);
        p.skip.push_back(-1);
      }
      if (!use_skip) continue;
      for (auto s : extra) {
        p.sources.push_back(dir == Direction::Forward ? b.skips[s].stem : b.skips[s].reconv);
        p.segment.push_back(seg);
        p.skip.push_back(static_cast<std::int32_t>(s));
        p.any_skip = true;
      }
    }
    if (!p.targets.empty()) plans.push_back(std::move(p));
  }
  return plans;
}

template <typename T>
Matrix<T> one_hot(const GraphBatch& b, std::span<const NodeId> nodes) {
  Matrix<T> x = Matrix<T>::Zero(static_cast<Index>(nodes.size()), b.feature_width);
  for (std::size_t i = 0; i < nodes.size(); ++i) x(static_cast<Index>(i), b.feature[nodes[i]]) = T(1);
  return x;
}

FeatureMode mode_of(int feature_width) {
  return feature_width == 7 ? FeatureMode::Raw : FeatureMode::Aig;
}

} // namespace

template <typename T>
DeepGateModel<T>::DeepGateModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  const Index d = config_.hidden;
  const Index f = config_.feature_width;
  auto rng = make_rng(config_.seed, 0);

  auto make_direction = [&](const std::string& prefix, bool with_skip) {
    DirectionParams p;
    switch (config_.aggregator) {
      case Aggregator::Attention:
        p.w_query = params_.add(prefix + ".attn.w_query", d, 1, d, rng);
        p.w_key = params_.add(prefix + ".attn.w_key", d, 1, d, rng);
        if (with_skip) {
          p.w_skip = params_.add(prefix + ".attn.w_skip", 2 * config_.encoding_L, 1, 2 * config_.encoding_L, rng);
          p.has_skip = true;
        }
        break;
      case Aggregator::ConvSum:
        p.conv = params_.add(prefix + ".conv.weight", d, d, d, rng);
        break;
      case Aggregator::DeepSet:
        p.deepset_inner = nn::add_linear(params_, prefix + ".deepset.inner", d, d / 2, rng);
        p.deepset_outer = nn::add_linear(params_, prefix + ".deepset.outer", d / 2, d, rng);
        break;
      case Aggregator::GatedSum:
        p.gate = nn::add_linear(params_, prefix + ".gated.gate", d, d, rng);
        p.value_scale = params_.add(prefix + ".gated.value.scale", 1, d, 1, rng);
        p.value_shift = params_.add(prefix + ".gated.value.shift", 1, d, 1, rng);
        break;
    }
    p.gru = nn::add_gru(params_, prefix + ".gru", d + f, d, rng);
    return p;
  };
  fwd_ = make_direction("fwd", config_.uses_skip_edges());
  rev_ = make_direction("rev", false);

  const auto mode = mode_of(config_.feature_width);
  for (int k = 0; k < config_.feature_width; ++k) {
    const auto name = std::string(deepgate::to_string(kind_from_feature(k, mode)));
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    regressors_.push_back(nn::add_mlp(params_, "regressor." + lower, {d, config_.regressor_hidden, 1}, rng));
  }

  auto init_rng = make_rng(config_.seed, 1);
  Matrix<T> h0(1, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < d; ++i) h0(0, i) = static_cast<T>(standard_normal(init_rng) * scale);
  h0_ = params_.add_buffer("init.h0", std::move(h0));
}

template <typename T>
void DeepGateModel<T>::check_batch(const GraphBatch& batch) const {
  if (batch.feature_width != config_.feature_width)
    throw Error(ErrorCode::ConfigMismatch, "graph feature width " + std::to_string(batch.feature_width) +
                                               " does not match model width " +
                                               std::to_string(config_.feature_width));
  if (config_.uses_skip_edges() && !batch.skips.empty() && batch.encoding_L != config_.encoding_L)
    throw Error(ErrorCode::ConfigMismatch, "skip-edge encoding width " + std::to_string(2 * batch.encoding_L) +
                                               " does not match model width " +
                                               std::to_string(2 * config_.encoding_L));
  for (auto f : batch.feature)
    if (f >= config_.feature_width) throw Error(ErrorCode::ConfigMismatch, "feature index out of range");
}

template <typename T>
ForwardResult<T> DeepGateModel<T>::forward(Tape<T>& tape, const GraphBatch& batch,
                                           const ForwardOptions& options) const {
  check_batch(batch);
  const int iterations = options.iterations.value_or(config_.iterations);
  if (iterations < 0) throw Error(ErrorCode::DomainError, "iterations must be non-negative");
  const Index d = config_.hidden;
  const auto n = batch.num_nodes;
  const bool inference = !tape.requires_grad();
  const bool use_skip = config_.uses_skip_edges();
  const std::array<std::vector<GroupPlan>, 2> plans{plan_layer(batch, Direction::Forward, use_skip),
                                                     plan_layer(batch, Direction::Reverse, use_skip)};

  ForwardResult<T> result;

  // Training keeps per-node references into the tape; inference keeps a dense
  // state matrix and restarts the tape for every group.
  std::vector<RowRef<T>> current;
  Matrix<T> state;
  Value<T> state_leaf;
  if (inference) {
    state = params_.value(h0_).replicate(static_cast<Index>(n), 1);
  } else {
    const auto h0 = tape.parameter(params_, h0_);
    current.assign(n, RowRef<T>{h0, 0});
  }
  auto restart = [&] {
    if (!inference) return;
    tape.clear();
    state_leaf = tape.constant_ref(state);
  };
  auto rows_of = [&](std::span<const NodeId> ids) {
    if (inference) return nn::gather_rows(state_leaf, ids);
    std::vector<RowRef<T>> refs;
    refs.reserve(ids.size());
    for (NodeId v : ids) refs.push_back(current[v]);
    return nn::stack_rows<T>(refs);
  };
  auto snapshot = [&] {
    if (inference) return state;
    Matrix<T> h(static_cast<Index>(n), d);
    for (std::size_t v = 0; v < n; ++v) h.row(static_cast<Index>(v)) = current[v].value.data().row(current[v].row);
    return h;
  };

  Matrix<T> previous;
  if (options.record_movement) previous = snapshot();

  for (int t = 1; t <= iterations; ++t) {
    for (const auto dir : {Direction::Forward, Direction::Reverse}) {
      const auto& P = dir == Direction::Forward ? fwd_ : rev_;
      MessageRecord msg_record;
      if (options.record_messages) {
        msg_record.iteration = t;
        msg_record.direction = dir;
        msg_record.updated.assign(n, false);
        msg_record.message = nn::Matrix<double>::Zero(static_cast<Index>(n), d);
      }
      for (const auto& plan : plans[dir == Direction::Forward ? 0 : 1]) {
        restart();
        const auto G = plan.targets.size();
        auto hq = rows_of(plan.targets);
        auto hs = rows_of(plan.sources);
        Value<T> message;
        switch (config_.aggregator) {
          case Aggregator::Attention: {
            auto q = nn::matmul(hq, tape.parameter(params_, P.w_query));
            auto score = nn::add(nn::gather_rows(q, plan.segment), nn::matmul(hs, tape.parameter(params_, P.w_key)));
            if (P.has_skip && plan.any_skip) {
              Matrix<T> gamma = Matrix<T>::Zero(static_cast<Index>(plan.sources.size()), 2 * config_.encoding_L);
              for (std::size_t e = 0; e < plan.skip.size(); ++e) {
                if (plan.skip[e] < 0) continue;
                const auto& attr = batch.skips[static_cast<std::size_t>(plan.skip[e])].attr;
                for (std::size_t k = 0; k < attr.size(); ++k)
                  gamma(static_cast<Index>(e), static_cast<Index>(k)) = static_cast<T>(attr[k]);
              }
              score = nn::add(score, nn::matmul(tape.constant(std::move(gamma)), tape.parameter(params_, P.w_skip)));
            }
            auto alpha = nn::grouped_softmax(score, plan.segment, G);
            if (options.record_attention) {
              AttentionRecord rec{t, dir, plan.targets, plan.sources, plan.segment, {}};
              const auto& a = alpha.data();
              rec.alpha.assign(a.data(), a.data() + a.size());
              result.attention.push_back(std::move(rec));
            }
            message = nn::segment_sum(nn::scale_rows(hs, alpha), plan.segment, G);
            break;
          }
          case Aggregator::ConvSum:
            message = nn::matmul(nn::segment_sum(hs, plan.segment, G), tape.parameter(params_, P.conv));
            break;
          case Aggregator::DeepSet: {
            auto inner = nn::relu(nn::linear(tape, params_, P.deepset_inner, hs));
            message = nn::linear(tape, params_, P.deepset_outer, nn::segment_sum(inner, plan.segment, G));
            break;
          }
          case Aggregator::GatedSum: {
            auto gate = nn::sigmoid(nn::linear(tape, params_, P.gate, hs));
            auto value = nn::add(nn::mul(hs, tape.parameter(params_, P.value_scale)),
                                 tape.parameter(params_, P.value_shift));
            message = nn::segment_sum(nn::mul(gate, value), plan.segment, G);
            break;
          }
        }
        if (options.record_messages) {
          const auto& m = message.data();
          for (std::size_t i = 0; i < G; ++i) {
            msg_record.updated[plan.targets[i]] = true;
            msg_record.message.row(plan.targets[i]) = m.row(static_cast<Index>(i)).template cast<double>();
          }
        }
        const std::array<Value<T>, 2> parts{message, tape.constant(one_hot<T>(batch, plan.targets))};
        auto updated = nn::gru_cell(tape, params_, P.gru, nn::concat<T>(parts), hq);
        if (inference) {
          const auto& h = updated.data();
          for (std::size_t i = 0; i < G; ++i) state.row(plan.targets[i]) = h.row(static_cast<Index>(i));
        } else {
          for (std::size_t i = 0; i < G; ++i) current[plan.targets[i]] = RowRef<T>{updated, static_cast<Index>(i)};
        }
      }
      if (options.record_messages) result.messages.push_back(std::move(msg_record));
    }
    if (options.record_movement) {
      auto now = snapshot();
      result.movement.push_back(static_cast<double>((now - previous).rowwise().norm().maxCoeff()));
      previous = std::move(now);
    }
  }

  restart();
  result.hidden = snapshot();

  // Per-kind regressors.
  std::vector<std::vector<NodeId>> by_kind(static_cast<std::size_t>(config_.feature_width));
  for (NodeId v = 0; v < n; ++v) by_kind[batch.feature[v]].push_back(v);
  std::vector<RowRef<T>> out(n);
  for (std::size_t k = 0; k < by_kind.size(); ++k) {
    if (by_kind[k].empty()) continue;
    auto y = nn::sigmoid(nn::mlp(tape, params_, regressors_[k], rows_of(by_kind[k])));
    for (std::size_t i = 0; i < by_kind[k].size(); ++i) out[by_kind[k][i]] = RowRef<T>{y, static_cast<Index>(i)};
  }
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "batch has no nodes");
  result.prediction = nn::stack_rows<T>(out);
  return result;
}

template <typename T>
std::vector<double> DeepGateModel<T>::predict(const GraphBatch& batch, std::optional<int> iterations) const {
  Tape<T> tape(false);
  ForwardOptions opts;
  opts.iterations = iterations;
  const auto r = forward(tape, batch, opts);
  const auto& p = r.prediction.data();
  std::vector<double> out(static_cast<std::size_t>(p.rows()));
  for (Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(p(i, 0));
  return out;
}

template <typename T>
std::vector<double> DeepGateModel<T>::predict(const LabeledGraph& graph, std::optional<int> iterations) const {
  return predict(GraphBatch::from_graph(graph), iterations);
}

template <typename T>
void DeepGateModel<T>::save(const std::filesystem::path& path, const nn::AdamState<T>* adam,
                            const nlohmann::json& extra) const {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["model"] = config_.to_json();
  nn::save_checkpoint(path, meta, params_, adam);
}

template <typename T>
DeepGateModel<T> DeepGateModel<T>::load(const nn::CheckpointContents& ckpt) {
  if (!ckpt.meta.contains("model")) throw Error(ErrorCode::FormatError, "checkpoint has no model config");
  DeepGateModel model(ModelConfig::from_json(ckpt.meta.at("model")));
  nn::restore_parameters(ckpt, model.params_);
  return model;
}

template <typename T>
DeepGateModel<T> DeepGateModel<T>::load(const std::filesystem::path& path) {
  return load(nn::load_checkpoint(path));
}

template class DeepGateModel<float>;
template class DeepGateModel<double>;

} // namespace deepgate
