#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace deepgate::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

/// `Standard` trains in single precision; `Verification` runs the same code
/// in double precision for finite-difference checks.
enum class Precision : std::uint8_t { Standard, Verification };

template <typename T>
class Tape;
template <typename T>
class ParameterStore;
template <typename T>
struct Gradients;

/// Handle to a matrix recorded on a tape. All values are 2-D; vectors are
/// 1 x n rows.
template <typename T>
class Value {
public:
  Value() = default;

  Index rows() const { return data().rows(); }
  Index cols() const { return data().cols(); }
  const Matrix<T>& data() const;
  Tape<T>* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape<T>;
  Value(Tape<T>* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// One row of a recorded value.
template <typename T>
struct RowRef {
  Value<T> value;
  Index row = 0;
};

/// Reverse-mode record. Nodes are appended in evaluation order, so walking
/// the tape backwards visits every node after all of its consumers.
template <typename T>
class Tape {
public:
  using Backward = std::function<void(Tape&, std::uint32_t)>;

  explicit Tape(bool requires_grad = true) : requires_grad_(requires_grad) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool requires_grad() const { return requires_grad_; }
  std::size_t size() const { return nodes_.size(); }
  void clear();

  Value<T> constant(Matrix<T> m);
  /// Leaf that refers to `m` without copying; `m` must outlive its use.
  Value<T> constant_ref(const Matrix<T>& m);
  /// Leaf for parameter `index` of `store`; repeated calls share one node.
  Value<T> parameter(const ParameterStore<T>& store, std::size_t index);

  /// Accumulates d(loss)/d(parameter) into `grads` for every parameter leaf.
  /// Throws NonScalarLoss unless `loss` is 1 x 1.
  void backward(Value<T> loss, Gradients<T>& grads);

  // Op plumbing.
  Value<T> record(Matrix<T> value, Backward backward);
  const Matrix<T>& value(std::uint32_t id) const {
    const auto& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }
  /// Gradient buffer of node `id`, zero-initialised on first access.
  Matrix<T>& grad(std::uint32_t id);
  const Matrix<T>& grad_or_empty(std::uint32_t id) const { return nodes_[id].grad; }
  Value<T> handle(std::uint32_t id) { return Value<T>(this, id); }

private:
  struct Node {
    Matrix<T> value;
    const Matrix<T>* ref = nullptr;
    Matrix<T> grad;
    Backward backward;
    std::int64_t param = -1;
  };

  bool requires_grad_;
  std::vector<Node> nodes_;
  const ParameterStore<T>* param_store_ = nullptr;
  std::vector<std::int64_t> param_leaf_;
};

template <typename T>
const Matrix<T>& Value<T>::data() const {
  return tape_->value(id_);
}

// ---------------------------------------------------------------------------
// Differentiable operations. Shape errors raise ShapeMismatch.

template <typename T> Value<T> matmul(Value<T> a, Value<T> b);
/// Elementwise sum; `b` may also be a 1 x cols row broadcast over `a`.
template <typename T> Value<T> add(Value<T> a, Value<T> b);
template <typename T> Value<T> sub(Value<T> a, Value<T> b);
/// Elementwise product; `b` may also be a 1 x cols row broadcast over `a`.
template <typename T> Value<T> mul(Value<T> a, Value<T> b);
template <typename T> Value<T> scale(Value<T> a, T factor);
/// Column-wise concatenation of values with equal row counts.
template <typename T> Value<T> concat(std::span<const Value<T>> parts);
template <typename T> Value<T> slice_cols(Value<T> a, Index start, Index count);
template <typename T> Value<T> sigmoid(Value<T> a);
template <typename T> Value<T> tanh(Value<T> a);
template <typename T> Value<T> relu(Value<T> a);
/// Softmax of an E x 1 score column within each group; group[e] in
/// [0, num_groups). Subtracts the per-group maximum. Throws EmptyGroup.
template <typename T>
Value<T> grouped_softmax(Value<T> scores, std::span<const std::uint32_t> group, std::size_t num_groups);
template <typename T> Value<T> gather_rows(Value<T> a, std::span<const std::uint32_t> rows);
/// Stacks rows taken from (possibly different) values into one matrix.
template <typename T> Value<T> stack_rows(std::span<const RowRef<T>> rows);
/// out[s] = sum of rows e with segment[e] == s.
template <typename T>
Value<T> segment_sum(Value<T> a, std::span<const std::uint32_t> segment, std::size_t num_segments);
/// Multiplies row i of `a` by s(i, 0).
template <typename T> Value<T> scale_rows(Value<T> a, Value<T> s);
template <typename T> Value<T> sum(Value<T> a);
/// mean(|a - target|) as a 1 x 1 value; subgradient 0 where a == target.
template <typename T> Value<T> mean_abs_error(Value<T> a, const Matrix<T>& target);
/// sum(|a - target|) / denominator.
template <typename T> Value<T> abs_error_sum(Value<T> a, const Matrix<T>& target, T denominator);

} // namespace deepgate::nn
