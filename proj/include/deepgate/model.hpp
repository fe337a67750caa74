#pragma once

#include "deepgate/graph_prep.hpp"
#include "deepgate/nn/layers.hpp"
#include "deepgate/nn/parameters.hpp"
#include "deepgate/nn/tape.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepgate {

enum class Aggregator : std::uint8_t { Attention, ConvSum, DeepSet, GatedSum };

std::string_view to_string(Aggregator a);
/// Accepts "attention", "conv_sum", "deepset", "gated_sum"; DomainError otherwise.
Aggregator aggregator_from_string(std::string_view s);

struct ModelConfig {
  int hidden = 64;
  int iterations = 10;
  int encoding_L = 8;
  Aggregator aggregator = Aggregator::Attention;
  bool skip_connections = true;
  int feature_width = 3;
  int regressor_hidden = 32;
  std::uint64_t seed = 0;

  /// Skip edges only take part in attention aggregation.
  bool uses_skip_edges() const { return skip_connections && aggregator == Aggregator::Attention; }
  /// Throws DomainError for non-positive sizes or an unknown feature width.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

/// Disjoint union of labeled graphs with global node ids. Level groups are
/// the union of member groups by level index.
struct GraphBatch {
  std::size_t num_nodes = 0;
  int feature_width = 3;
  int encoding_L = 8;
  std::vector<std::uint8_t> feature;
  std::vector<double> label;
  std::vector<std::uint32_t> level;
  std::vector<std::vector<NodeId>> preds; // in edge order
  std::vector<std::vector<NodeId>> succs; // in edge order
  std::vector<SkipEdge> skips;            // global ids
  std::vector<std::vector<std::uint32_t>> skip_in;  // per reconv node, indices into skips
  std::vector<std::vector<std::uint32_t>> skip_out; // per stem
  std::vector<std::vector<NodeId>> levels;
  std::vector<std::size_t> offsets; // node offset per member graph, plus total

  static GraphBatch from_graphs(std::span<const LabeledGraph* const> graphs);
  static GraphBatch from_graph(const LabeledGraph& graph);
};

enum class Direction : std::uint8_t { Forward, Reverse };

/// Coefficients of one attention step: alpha[e] belongs to targets[segment[e]].
struct AttentionRecord {
  int iteration = 0;
  Direction direction = Direction::Forward;
  std::vector<NodeId> targets;
  std::vector<NodeId> sources;
  std::vector<std::uint32_t> segment;
  std::vector<double> alpha;
};

/// Aggregated messages of one layer; rows of nodes not updated stay zero.
struct MessageRecord {
  int iteration = 0;
  Direction direction = Direction::Forward;
  std::vector<bool> updated;
  nn::Matrix<double> message;
};

struct ForwardOptions {
  std::optional<int> iterations;
  bool record_attention = false;
  bool record_messages = false;
  bool record_movement = false;
};

template <typename T>
struct ForwardResult {
  nn::Value<T> prediction; // N x 1
  nn::Matrix<T> hidden;    // N x d after the last iteration
  std::vector<double> movement; // movement[t-1] = max_v |h_v^t - h_v^(t-1)|
  std::vector<AttentionRecord> attention;
  std::vector<MessageRecord> messages;
};

/// Recurrent DAG network: per iteration a forward layer over increasing
/// levels then a reverse layer over decreasing levels, both updating one
/// shared hidden state, followed by a per-gate-kind regressor.
template <typename T>
class DeepGateModel {
public:
  explicit DeepGateModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  nn::ParameterStore<T>& params() { return params_; }
  const nn::ParameterStore<T>& params() const { return params_; }
  const nn::Matrix<T>& initial_state() const { return params_.value(h0_); }

  /// Records the pass on `tape`. With a tape that does not require gradients
  /// the tape is reset between level groups to bound memory.
  ForwardResult<T> forward(nn::Tape<T>& tape, const GraphBatch& batch, const ForwardOptions& options = {}) const;
  std::vector<double> predict(const GraphBatch& batch, std::optional<int> iterations = {}) const;
  std::vector<double> predict(const LabeledGraph& graph, std::optional<int> iterations = {}) const;

  std::size_t count_parameters() const { return params_.count_parameters(); }
  std::map<std::string, std::size_t> count_parameters_by_group() const { return params_.count_by_group(); }

  /// Checkpoint metadata: model config plus `extra` fields.
  void save(const std::filesystem::path& path, const nn::AdamState<T>* adam, const nlohmann::json& extra = {}) const;
  /// Rebuilds a model from a checkpoint's config and parameters.
  static DeepGateModel load(const nn::CheckpointContents& ckpt);
  static DeepGateModel load(const std::filesystem::path& path);

private:
  struct DirectionParams {
    nn::GruParams gru;
    std::size_t w_query = 0, w_key = 0, w_skip = 0;
    bool has_skip = false;
    std::size_t conv = 0;
    nn::LinearParams deepset_inner, deepset_outer;
    nn::LinearParams gate;
    std::size_t value_scale = 0, value_shift = 0;
  };

  void check_batch(const GraphBatch& batch) const;

  ModelConfig config_;
  nn::ParameterStore<T> params_;
  std::size_t h0_ = 0;
  DirectionParams fwd_, rev_;
  std::vector<nn::MlpParams> regressors_;
};

extern template class DeepGateModel<float>;
extern template class DeepGateModel<double>;

} // namespace deepgate
