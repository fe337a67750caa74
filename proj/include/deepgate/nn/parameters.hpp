#pragma once

#include "deepgate/nn/tape.hpp"
#include "deepgate/random.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deepgate::nn {

/// Named parameter arrays. Non-trainable entries (buffers) are checkpointed
/// but never updated or counted.
template <typename T>
class ParameterStore {
public:
  struct Entry {
    std::string name;
    Matrix<T> value;
    bool trainable = true;
  };

  /// Adds a trainable array drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  std::size_t add(std::string name, Index rows, Index cols, Index fan_in, Rng& rng);
  std::size_t add_buffer(std::string name, Matrix<T> value);

  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const { return by_name_.contains(std::string(name)); }
  std::size_t size() const { return entries_.size(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Matrix<T>& value(std::size_t i) const { return entries_[i].value; }
  Matrix<T>& value(std::size_t i) { return entries_[i].value; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Number of trainable scalars.
  std::size_t count_parameters() const;
  /// Trainable scalars per group, where a group is the name up to its last '.'.
  std::map<std::string, std::size_t> count_by_group() const;

  /// Copies values from `other` by name; shapes and names must match exactly
  /// (ConfigMismatch otherwise). Converts precision when needed.
  template <typename U>
  void assign_from(const ParameterStore<U>& other);

private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// Gradient buffers aligned with a parameter store.
template <typename T>
struct Gradients {
  std::vector<Matrix<T>> grads;

  explicit Gradients(const ParameterStore<T>& store);
  void zero();
  void add(const Gradients& other);
  void scale(T factor);
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(const ParameterStore<T>& store, AdamConfig cfg);
};

/// One bias-corrected ADAM update of every trainable parameter.
template <typename T>
void adam_step(ParameterStore<T>& params, const Gradients<T>& grads, AdamState<T>& state);

// ---------------------------------------------------------------------------
// Checkpoints
//
// Little-endian binary container:
//   "DGCKPT01"                   8 bytes magic
//   u32 version (1), u32 scalar width in bytes (4 or 8)
//   u64 metadata length, metadata as UTF-8 JSON
//   u64 array count, then per array:
//     u32 name length, name bytes, u32 flags (bit 0 = trainable),
//     u64 rows, u64 cols, rows * cols scalars in row-major order
// Optimiser moments are stored as arrays named "adam.m/<param>" and
// "adam.v/<param>"; the optimiser step lives in the metadata.

struct CheckpointArray {
  std::string name;
  bool trainable = true;
  Index rows = 0;
  Index cols = 0;
  std::vector<double> data;
};

struct CheckpointContents {
  nlohmann::json meta;
  unsigned scalar_width = 4;
  std::vector<CheckpointArray> arrays;

  const CheckpointArray* find(std::string_view name) const;
};

template <typename T>
void write_checkpoint(std::ostream& out, const nlohmann::json& meta, const ParameterStore<T>& params,
                      const AdamState<T>* adam);
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta, const ParameterStore<T>& params,
                     const AdamState<T>* adam);

CheckpointContents read_checkpoint(std::istream& in);
CheckpointContents load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint arrays into an already-shaped store (ConfigMismatch on
/// any missing name or shape difference).
template <typename T>
void restore_parameters(const CheckpointContents& ckpt, ParameterStore<T>& params);

/// Rebuilds optimiser state for `params`; returns nullopt when the
/// checkpoint holds no moments.
template <typename T>
std::optional<AdamState<T>> restore_adam(const CheckpointContents& ckpt, const ParameterStore<T>& params,
                                         AdamConfig config);

} // namespace deepgate::nn
