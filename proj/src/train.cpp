#include "deepgate/train.hpp"

#include "deepgate/error.hpp"
#include "deepgate/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace deepgate {

void TrainConfig::validate() const {
  if (epochs <= 0) throw Error(ErrorCode::DomainError, "epochs must be positive");
  if (!(lr > 0.0)) throw Error(ErrorCode::DomainError, "learning rate must be positive");
  if (batch_size == 0) throw Error(ErrorCode::DomainError, "batch size must be positive");
  if (checkpoint_every < 0) throw Error(ErrorCode::DomainError, "checkpoint cadence must be non-negative");
  if (eval_iterations && *eval_iterations < 0) throw Error(ErrorCode::DomainError, "eval iterations must be >= 0");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"epochs", epochs},
                      {"lr", lr},
                      {"batch_size", batch_size},
                      {"seed", seed},
                      {"shuffle", shuffle},
                      {"checkpoint_every", checkpoint_every},
                      {"checkpoint_path", checkpoint_path.string()}};
  j["eval_iterations"] = eval_iterations ? nlohmann::json(*eval_iterations) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  try {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.shuffle = j.at("shuffle").get<bool>();
    c.checkpoint_every = j.at("checkpoint_every").get<int>();
    c.checkpoint_path = j.at("checkpoint_path").get<std::string>();
    if (j.contains("eval_iterations") && !j.at("eval_iterations").is_null())
      c.eval_iterations = j.at("eval_iterations").get<int>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("train config: ") + e.what());
  }
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"test_error", e.test_error ? nlohmann::json(*e.test_error) : nlohmann::json(nullptr)},
                    {"seconds", e.seconds}});
  }
  return {{"model", model.to_json()},
          {"parameters", parameters},
          {"epochs", rows},
          {"checkpoint", checkpoint},
          {"wall_seconds", wall_seconds}};
}

TrainReport TrainReport::from_json(const nlohmann::json& j) {
  try {
    TrainReport r;
    r.model = ModelConfig::from_json(j.at("model"));
    r.parameters = j.at("parameters").get<std::size_t>();
    r.checkpoint = j.at("checkpoint").get<std::string>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& e : j.at("epochs")) {
      EpochRecord rec;
      rec.epoch = e.at("epoch").get<int>();
      rec.train_loss = e.at("train_loss").get<double>();
      if (!e.at("test_error").is_null()) rec.test_error = e.at("test_error").get<double>();
      rec.seconds = e.at("seconds").get<double>();
      r.epochs.push_back(rec);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("train report: ") + e.what());
  }
}

void TrainReport::write_tsv(std::ostream& out) const {
  out << "epoch\ttrain_loss\ttest_error\tseconds\n";
  char buf[128];
  for (const auto& e : epochs) {
    if (e.test_error)
      std::snprintf(buf, sizeof(buf), "%d\t%.8f\t%.8f\t%.3f\n", e.epoch, e.train_loss, *e.test_error, e.seconds);
    else
      std::snprintf(buf, sizeof(buf), "%d\t%.8f\tNA\t%.3f\n", e.epoch, e.train_loss, e.seconds);
    out << buf;
  }
}

double l1_loss(std::span<const double> prediction, std::span<const double> target) {
  if (prediction.size() != target.size())
    throw Error(ErrorCode::LengthMismatch, "prediction has " + std::to_string(prediction.size()) +
                                               " entries, target " + std::to_string(target.size()));
  if (prediction.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) s += std::abs(prediction[i] - target[i]);
  return s / static_cast<double>(prediction.size());
}

template <typename T>
nn::Value<T> l1_loss(nn::Value<T> prediction, std::span<const double> target) {
  if (static_cast<std::size_t>(prediction.rows()) != target.size() || prediction.cols() != 1)
    throw Error(ErrorCode::LengthMismatch, "prediction has " + std::to_string(prediction.rows()) +
                                               " rows, target " + std::to_string(target.size()));
  nn::Matrix<T> y(prediction.rows(), 1);
  for (std::size_t i = 0; i < target.size(); ++i) y(static_cast<nn::Index>(i), 0) = static_cast<T>(target[i]);
  return nn::mean_abs_error(prediction, y);
}

namespace {

struct ErrorSum {
  double abs = 0.0;
  std::size_t count = 0;
};

template <typename T>
ErrorSum batch_error(const DeepGateModel<T>& model, std::span<const LabeledGraph* const> graphs,
                     std::optional<int> iterations) {
  const auto batch = GraphBatch::from_graphs(graphs);
  const auto pred = model.predict(batch, iterations);
  ErrorSum s;
  for (std::size_t i = 0; i < pred.size(); ++i) s.abs += std::abs(pred[i] - batch.label[i]);
  s.count = pred.size();
  return s;
}

std::vector<const LabeledGraph*> split_graphs(const Dataset& dataset, Split split) {
  std::vector<const LabeledGraph*> out;
  for (auto i : dataset.indices(split)) out.push_back(&dataset.graphs[i]);
  return out;
}

} // namespace

template <typename T>
double avg_prediction_error(const DeepGateModel<T>& model, std::span<const LabeledGraph* const> graphs,
                            std::optional<int> iterations, unsigned threads, std::size_t batch_size) {
  if (graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no graphs to evaluate");
  batch_size = std::max<std::size_t>(1, batch_size);
  const std::size_t chunks = (graphs.size() + batch_size - 1) / batch_size;
  std::vector<ErrorSum> sums(chunks);
  auto work = [&](std::size_t c) {
    const auto begin = c * batch_size;
    const auto len = std::min(batch_size, graphs.size() - begin);
    sums[c] = batch_error(model, graphs.subspan(begin, len), iterations);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
          try {
            work(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }
  ErrorSum total;
  for (const auto& s : sums) {
    total.abs += s.abs;
    total.count += s.count;
  }
  if (total.count == 0) throw Error(ErrorCode::EmptyDataset, "graphs have no nodes");
  return total.abs / static_cast<double>(total.count);
}

template <typename T>
double avg_prediction_error(const DeepGateModel<T>& model, const Dataset& dataset, Split split,
                            std::optional<int> iterations, unsigned threads) {
  const auto graphs = split_graphs(dataset, split);
  return avg_prediction_error(model, std::span<const LabeledGraph* const>(graphs), iterations, threads);
}

template <typename T>
std::vector<double> t_sweep(const DeepGateModel<T>& model, const Dataset& dataset, Split split,
                            std::span<const int> iterations, unsigned threads) {
  std::vector<double> out;
  for (int t : iterations) out.push_back(avg_prediction_error(model, dataset, split, t, threads));
  return out;
}

namespace {

void run_epochs(const Dataset& dataset, TrainResult& state, const TrainConfig& config, int start_epoch,
                const EpochCallback& on_epoch) {
  using clock = std::chrono::steady_clock;
  const auto train_idx = dataset.indices(Split::Train);
  if (train_idx.empty()) throw Error(ErrorCode::EmptyDataset, "training split is empty");
  const auto test_graphs = split_graphs(dataset, Split::Test);
  auto& model = state.model;
  auto& params = model.params();
  nn::Gradients<float> grads(params);
  const auto wall_start = clock::now();
  const double wall_before = state.report.wall_seconds;

  auto save = [&](int epochs_done) {
    if (config.checkpoint_path.empty()) return;
    nlohmann::json meta = {{"train", config.to_json()},
                           {"epochs_done", epochs_done},
                           {"report", state.report.to_json()}};
    model.save(config.checkpoint_path, &state.adam, meta);
  };

  for (int epoch = start_epoch + 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = clock::now();
    auto order = train_idx;
    if (config.shuffle) {
      auto rng = make_rng(config.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch));
      shuffle(order, rng);
    }
    double abs_sum = 0.0;
    std::size_t node_count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const auto end = std::min(order.size(), begin + config.batch_size);
      std::vector<const LabeledGraph*> members;
      for (auto k = begin; k < end; ++k) members.push_back(&dataset.graphs[order[k]]);
      const auto batch = GraphBatch::from_graphs(members);
      nn::Tape<float> tape(true);
      const auto out = model.forward(tape, batch);
      const auto loss = l1_loss(out.prediction, batch.label);
      abs_sum += static_cast<double>(loss.data()(0, 0)) * static_cast<double>(batch.num_nodes);
      node_count += batch.num_nodes;
      grads.zero();
      tape.backward(loss, grads);
      nn::adam_step(params, grads, state.adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = abs_sum / static_cast<double>(std::max<std::size_t>(1, node_count));
    if (!test_graphs.empty())
      rec.test_error = avg_prediction_error(model, std::span<const LabeledGraph* const>(test_graphs),
                                            config.eval_iterations, config.threads, config.batch_size);
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    state.report.epochs.push_back(rec);
    state.report.wall_seconds = wall_before + std::chrono::duration<double>(clock::now() - wall_start).count();
    if (on_epoch) on_epoch(rec);
    const bool final = epoch == config.epochs;
    if (final || (config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0)) {
      if (final && !config.checkpoint_path.empty()) state.report.checkpoint = config.checkpoint_path.string();
      save(epoch);
    }
  }
}

} // namespace

TrainResult train(const Dataset& dataset, const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.indices(Split::Train).empty()) throw Error(ErrorCode::EmptyDataset, "training split is empty");
  DeepGateModel<float> model(model_config);
  nn::AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;
  nn::AdamState<float> adam(model.params(), adam_cfg);
  TrainResult state{std::move(model), std::move(adam), {}};
  state.report.model = model_config;
  state.report.parameters = state.model.count_parameters();
  run_epochs(dataset, state, config, 0, on_epoch);
  return state;
}

TrainResult resume(const Dataset& dataset, const std::filesystem::path& checkpoint, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
  config.validate();
  const auto ckpt = nn::load_checkpoint(checkpoint);
  if (!ckpt.meta.contains("epochs_done") || !ckpt.meta.contains("report"))
    throw Error(ErrorCode::FormatError, "checkpoint was not written by a training run");
  auto model = DeepGateModel<float>::load(ckpt);
  nn::AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;
  auto adam = nn::restore_adam(ckpt, model.params(), adam_cfg);
  if (!adam) throw Error(ErrorCode::FormatError, "checkpoint has no optimiser state");
  TrainResult state{std::move(model), std::move(*adam), TrainReport::from_json(ckpt.meta.at("report"))};
  const int done = ckpt.meta.at("epochs_done").get<int>();
  if (done > config.epochs)
    throw Error(ErrorCode::ConfigMismatch, "checkpoint already has " + std::to_string(done) + " epochs");
  run_epochs(dataset, state, config, done, on_epoch);
  return state;
}

template nn::Value<float> l1_loss(nn::Value<float>, std::span<const double>);
template nn::Value<double> l1_loss(nn::Value<double>, std::span<const double>);
template double avg_prediction_error(const DeepGateModel<float>&, std::span<const LabeledGraph* const>,
                                     std::optional<int>, unsigned, std::size_t);
template double avg_prediction_error(const DeepGateModel<double>&, std::span<const LabeledGraph* const>,
                                     std::optional<int>, unsigned, std::size_t);
template double avg_prediction_error(const DeepGateModel<float>&, const Dataset&, Split, std::optional<int>, unsigned);
template double avg_prediction_error(const DeepGateModel<double>&, const Dataset&, Split, std::optional<int>, unsigned);
template std::vector<double> t_sweep(const DeepGateModel<float>&, const Dataset&, Split, std::span<const int>, unsigned);
template std::vector<double> t_sweep(const DeepGateModel<double>&, const Dataset&, Split, std::span<const int>,
                                     unsigned);

} // namespace deepgate
