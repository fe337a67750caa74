#pragma once

#include "deepgate/graph_prep.hpp"
#include "deepgate/model.hpp"
#include "deepgate/nn/parameters.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepgate {

struct TrainConfig {
  int epochs = 60;
  double lr = 1e-4;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  bool shuffle = true;
  /// Save a checkpoint every N epochs (0: only at the end, when a path is set).
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_path;
  /// Worker threads for evaluation; results do not depend on the count.
  unsigned threads = 1;
  /// Iterations used for the per-epoch test metric (default: training T).
  std::optional<int> eval_iterations;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> test_error;
  double seconds = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  ModelConfig model;
  std::vector<EpochRecord> epochs;
  std::string checkpoint;
  double wall_seconds = 0.0;
  std::size_t parameters = 0;

  nlohmann::json to_json() const;
  static TrainReport from_json(const nlohmann::json& j);
  /// One tab-separated row per epoch with a header line.
  void write_tsv(std::ostream& out) const;
};

/// Mean absolute difference; LengthMismatch when sizes differ.
double l1_loss(std::span<const double> prediction, std::span<const double> target);

/// Differentiable variant over an N x 1 prediction.
template <typename T>
nn::Value<T> l1_loss(nn::Value<T> prediction, std::span<const double> target);

/// (1/N) sum |y - y_hat| over every node of the given graphs. Graphs are
/// evaluated in fixed batches and reduced in order, so the value does not
/// depend on `threads`.
template <typename T>
double avg_prediction_error(const DeepGateModel<T>& model, std::span<const LabeledGraph* const> graphs,
                            std::optional<int> iterations = {}, unsigned threads = 1, std::size_t batch_size = 16);

template <typename T>
double avg_prediction_error(const DeepGateModel<T>& model, const Dataset& dataset, Split split,
                            std::optional<int> iterations = {}, unsigned threads = 1);

/// Metric per entry of `iterations`, with the model's T overridden.
template <typename T>
std::vector<double> t_sweep(const DeepGateModel<T>& model, const Dataset& dataset, Split split,
                            std::span<const int> iterations, unsigned threads = 1);

struct TrainResult {
  DeepGateModel<float> model;
  nn::AdamState<float> adam;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains a fresh model. Each epoch draws its shuffle from (seed, epoch), so
/// a resumed run replays the same batches as an uninterrupted one.
TrainResult train(const Dataset& dataset, const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Continues a run from a checkpoint written by `train` until `config.epochs`
/// epochs are complete.
TrainResult resume(const Dataset& dataset, const std::filesystem::path& checkpoint, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

} // namespace deepgate
