#include "deepgate/nn/tape.hpp"

#include "deepgate/error.hpp"
#include "deepgate/nn/parameters.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace deepgate::nn {

namespace {

std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

[[noreturn]] void shape_error(const char* op, Index ar, Index ac, Index br, Index bc) {
  throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + shape(ar, ac) + " vs " + shape(br, bc));
}

template <typename T>
Tape<T>& tape_of(Value<T> a) {
  if (!a.valid()) throw Error(ErrorCode::ShapeMismatch, "operation on an empty value");
  return *a.tape();
}

template <typename T>
void same_tape(Value<T> a, Value<T> b) {
  if (a.tape() != b.tape()) throw Error(ErrorCode::ShapeMismatch, "values belong to different tapes");
}

} // namespace

// ---------------------------------------------------------------------------
// Tape

template <typename T>
void Tape<T>::clear() {
  nodes_.clear();
  param_store_ = nullptr;
  param_leaf_.clear();
}

template <typename T>
Value<T> Tape<T>::constant(Matrix<T> m) {
  nodes_.push_back(Node{std::move(m), nullptr, {}, {}, -1});
  return Value<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
Value<T> Tape<T>::constant_ref(const Matrix<T>& m) {
  nodes_.push_back(Node{{}, &m, {}, {}, -1});
  return Value<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
Value<T> Tape<T>::parameter(const ParameterStore<T>& store, std::size_t index) {
  if (param_store_ != &store) {
    param_store_ = &store;
    param_leaf_.assign(store.size(), -1);
  }
  if (param_leaf_.size() < store.size()) param_leaf_.resize(store.size(), -1);
  if (param_leaf_[index] >= 0) return Value<T>(this, static_cast<std::uint32_t>(param_leaf_[index]));
  nodes_.push_back(Node{{}, &store.value(index), {}, {}, static_cast<std::int64_t>(index)});
  param_leaf_[index] = static_cast<std::int64_t>(nodes_.size() - 1);
  return Value<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
Value<T> Tape<T>::record(Matrix<T> value, Backward backward) {
  nodes_.push_back(Node{std::move(value), nullptr, {}, requires_grad_ ? std::move(backward) : Backward{}, -1});
  return Value<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
Matrix<T>& Tape<T>::grad(std::uint32_t id) {
  auto& n = nodes_[id];
  if (n.grad.size() == 0) {
    const auto& v = n.ref ? *n.ref : n.value;
    n.grad = Matrix<T>::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Value<T> loss, Gradients<T>& grads) {
  if (loss.tape() != this) throw Error(ErrorCode::ShapeMismatch, "loss belongs to a different tape");
  if (loss.rows() != 1 || loss.cols() != 1)
    throw Error(ErrorCode::NonScalarLoss, "loss must be 1x1, got " + shape(loss.rows(), loss.cols()));
  if (!requires_grad_) throw Error(ErrorCode::InvalidStructure, "tape was recorded without gradients");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  grad(loss.id())(0, 0) = T(1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, static_cast<std::uint32_t>(i));
    if (n.param >= 0 && param_store_ != nullptr) {
      auto& g = grads.grads[static_cast<std::size_t>(n.param)];
      if (g.rows() != n.grad.rows() || g.cols() != n.grad.cols())
        throw Error(ErrorCode::ShapeMismatch, "gradient buffer does not match parameter shape");
      g += n.grad;
    }
    // Intermediate gradients are no longer needed once propagated.
    if (n.param < 0) n.grad.resize(0, 0);
  }
}

// ---------------------------------------------------------------------------
// Operations

template <typename T>
Value<T> matmul(Value<T> a, Value<T> b) {
  same_tape(a, b);
  auto& t = tape_of(a);
  const auto& A = a.data();
  const auto& B = b.data();
  if (A.cols() != B.rows()) shape_error("matmul", A.rows(), A.cols(), B.rows(), B.cols());
  Matrix<T> out(A.rows(), B.cols());
  out.noalias() = A * B;
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(out), [ia, ib](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    const auto& A = tp.value(ia);
    const auto& B = tp.value(ib);
    tp.grad(ia).noalias() += g * B.transpose();
    tp.grad(ib).noalias() += A.transpose() * g;
  });
}

template <typename T>
Value<T> add(Value<T> a, Value<T> b) {
  same_tape(a, b);
  auto& t = tape_of(a);
  const auto& A = a.data();
  const auto& B = b.data();
  const auto ia = a.id(), ib = b.id();
  if (A.rows() == B.rows() && A.cols() == B.cols()) {
    return t.record(A + B, [ia, ib](Tape<T>& tp, std::uint32_t self) {
      const auto& g = tp.grad_or_empty(self);
      tp.grad(ia) += g;
      tp.grad(ib) += g;
    });
  }
  if (B.rows() == 1 && B.cols() == A.cols()) {
    Matrix<T> out = A.rowwise() + B.row(0);
    return t.record(std::move(out), [ia, ib](Tape<T>& tp, std::uint32_t self) {
      const auto& g = tp.grad_or_empty(self);
      tp.grad(ia) += g;
      tp.grad(ib) += g.colwise().sum();
    });
  }
  shape_error("add", A.rows(), A.cols(), B.rows(), B.cols());
}

template <typename T>
Value<T> sub(Value<T> a, Value<T> b) {
  same_tape(a, b);
  auto& t = tape_of(a);
  const auto& A = a.data();
  const auto& B = b.data();
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_error("sub", A.rows(), A.cols(), B.rows(), B.cols());
  const auto ia = a.id(), ib = b.id();
  return t.record(A - B, [ia, ib](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    tp.grad(ia) += g;
    tp.grad(ib) -= g;
  });
}

template <typename T>
Value<T> mul(Value<T> a, Value<T> b) {
  same_tape(a, b);
  auto& t = tape_of(a);
  const auto& A = a.data();
  const auto& B = b.data();
  const auto ia = a.id(), ib = b.id();
  if (A.rows() == B.rows() && A.cols() == B.cols()) {
    Matrix<T> out = A.cwiseProduct(B);
    return t.record(std::move(out), [ia, ib](Tape<T>& tp, std::uint32_t self) {
      const auto& g = tp.grad_or_empty(self);
      tp.grad(ia) += g.cwiseProduct(tp.value(ib));
      tp.grad(ib) += g.cwiseProduct(tp.value(ia));
    });
  }
  if (B.rows() == 1 && B.cols() == A.cols()) {
    Matrix<T> out = A.array().rowwise() * B.row(0).array();
    return t.record(std::move(out), [ia, ib](Tape<T>& tp, std::uint32_t self) {
      const auto& g = tp.grad_or_empty(self);
      const auto& A = tp.value(ia);
      const auto& B = tp.value(ib);
      tp.grad(ia).array() += g.array().rowwise() * B.row(0).array();
      tp.grad(ib) += g.cwiseProduct(A).colwise().sum();
    });
  }
  shape_error("mul", A.rows(), A.cols(), B.rows(), B.cols());
}

template <typename T>
Value<T> scale(Value<T> a, T factor) {
  auto& t = tape_of(a);
  const auto ia = a.id();
  return t.record(a.data() * factor, [ia, factor](Tape<T>& tp, std::uint32_t self) {
    tp.grad(ia) += tp.grad_or_empty(self) * factor;
  });
}

template <typename T>
Value<T> concat(std::span<const Value<T>> parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat of zero values");
  auto& t = tape_of(parts[0]);
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto& p : parts) {
    same_tape(parts[0], p);
    if (p.rows() != rows) shape_error("concat", rows, cols, p.rows(), p.cols());
    cols += p.cols();
  }
  Matrix<T> out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.data();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.cols();
  }
  return t.record(std::move(out), [ids = std::move(ids), offsets = std::move(offsets)](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto& gk = tp.grad(ids[k]);
      gk += g.middleCols(offsets[k], gk.cols());
    }
  });
}

template <typename T>
Value<T> slice_cols(Value<T> a, Index start, Index count) {
  auto& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.cols())
    throw Error(ErrorCode::ShapeMismatch, "slice_cols [" + std::to_string(start) + ", " +
                                              std::to_string(start + count) + ") of " + shape(a.rows(), a.cols()));
  Matrix<T> out = a.data().middleCols(start, count);
  const auto ia = a.id();
  return t.record(std::move(out), [ia, start, count](Tape<T>& tp, std::uint32_t self) {
    tp.grad(ia).middleCols(start, count) += tp.grad_or_empty(self);
  });
}

template <typename T>
Value<T> sigmoid(Value<T> a) {
  auto& t = tape_of(a);
  Matrix<T> out = a.data().unaryExpr([](T x) { return T(1) / (T(1) + std::exp(-x)); });
  const auto ia = a.id();
  return t.record(std::move(out), [ia](Tape<T>& tp, std::uint32_t self) {
    const auto y = tp.value(self).array();
    tp.grad(ia).array() += tp.grad_or_empty(self).array() * y * (T(1) - y);
  });
}

template <typename T>
Value<T> tanh(Value<T> a) {
  auto& t = tape_of(a);
  Matrix<T> out = a.data().array().tanh().matrix();
  const auto ia = a.id();
  return t.record(std::move(out), [ia](Tape<T>& tp, std::uint32_t self) {
    const auto y = tp.value(self).array();
    tp.grad(ia).array() += tp.grad_or_empty(self).array() * (T(1) - y * y);
  });
}

template <typename T>
Value<T> relu(Value<T> a) {
  auto& t = tape_of(a);
  Matrix<T> out = a.data().cwiseMax(T(0));
  const auto ia = a.id();
  return t.record(std::move(out), [ia](Tape<T>& tp, std::uint32_t self) {
    const auto& x = tp.value(ia);
    tp.grad(ia).array() += (x.array() > T(0)).select(tp.grad_or_empty(self).array(), T(0));
  });
}

template <typename T>
Value<T> grouped_softmax(Value<T> scores, std::span<const std::uint32_t> group, std::size_t num_groups) {
  auto& t = tape_of(scores);
  const auto& S = scores.data();
  if (S.cols() != 1 || static_cast<std::size_t>(S.rows()) != group.size())
    shape_error("grouped_softmax", S.rows(), S.cols(), static_cast<Index>(group.size()), 1);
  std::vector<T> mx(num_groups, -std::numeric_limits<T>::infinity());
  std::vector<std::size_t> members(num_groups, 0);
  for (std::size_t e = 0; e < group.size(); ++e) {
    if (group[e] >= num_groups)
      throw Error(ErrorCode::ShapeMismatch, "group id " + std::to_string(group[e]) + " out of range");
    mx[group[e]] = std::max(mx[group[e]], S(static_cast<Index>(e), 0));
    ++members[group[e]];
  }
  for (std::size_t g = 0; g < num_groups; ++g)
    if (members[g] == 0) throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(g) + " has no members");
  Matrix<T> out(S.rows(), 1);
  std::vector<T> denom(num_groups, T(0));
  for (std::size_t e = 0; e < group.size(); ++e) {
    const T v = std::exp(S(static_cast<Index>(e), 0) - mx[group[e]]);
    out(static_cast<Index>(e), 0) = v;
    denom[group[e]] += v;
  }
  for (std::size_t e = 0; e < group.size(); ++e) out(static_cast<Index>(e), 0) /= denom[group[e]];
  const auto is = scores.id();
  std::vector<std::uint32_t> grp(group.begin(), group.end());
  return t.record(std::move(out), [is, grp = std::move(grp), num_groups](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    const auto& y = tp.value(self);
    std::vector<T> dot(num_groups, T(0));
    for (std::size_t e = 0; e < grp.size(); ++e) dot[grp[e]] += g(static_cast<Index>(e), 0) * y(static_cast<Index>(e), 0);
    auto& gs = tp.grad(is);
    for (std::size_t e = 0; e < grp.size(); ++e) {
      const auto i = static_cast<Index>(e);
      gs(i, 0) += y(i, 0) * (g(i, 0) - dot[grp[e]]);
    }
  });
}

template <typename T>
Value<T> gather_rows(Value<T> a, std::span<const std::uint32_t> rows) {
  auto& t = tape_of(a);
  const auto& A = a.data();
  Matrix<T> out(static_cast<Index>(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= A.rows())
      throw Error(ErrorCode::ShapeMismatch, "gather_rows index " + std::to_string(rows[i]) + " of " +
                                                shape(A.rows(), A.cols()));
    out.row(static_cast<Index>(i)) = A.row(rows[i]);
  }
  const auto ia = a.id();
  std::vector<std::uint32_t> idx(rows.begin(), rows.end());
  return t.record(std::move(out), [ia, idx = std::move(idx)](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    auto& ga = tp.grad(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) ga.row(idx[i]) += g.row(static_cast<Index>(i));
  });
}

template <typename T>
Value<T> stack_rows(std::span<const RowRef<T>> rows) {
  if (rows.empty()) throw Error(ErrorCode::ShapeMismatch, "stack_rows of zero rows");
  auto& t = tape_of(rows[0].value);
  const Index cols = rows[0].value.cols();
  Matrix<T> out(static_cast<Index>(rows.size()), cols);
  std::vector<std::pair<std::uint32_t, Index>> src;
  src.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    same_tape(rows[0].value, r.value);
    const auto& M = r.value.data();
    if (M.cols() != cols) shape_error("stack_rows", 1, cols, 1, M.cols());
    if (r.row < 0 || r.row >= M.rows())
      throw Error(ErrorCode::ShapeMismatch, "stack_rows row " + std::to_string(r.row) + " of " +
                                                shape(M.rows(), M.cols()));
    out.row(static_cast<Index>(i)) = M.row(r.row);
    src.emplace_back(r.value.id(), r.row);
  }
  return t.record(std::move(out), [src = std::move(src)](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    for (std::size_t i = 0; i < src.size(); ++i) tp.grad(src[i].first).row(src[i].second) += g.row(static_cast<Index>(i));
  });
}

template <typename T>
Value<T> segment_sum(Value<T> a, std::span<const std::uint32_t> segment, std::size_t num_segments) {
  auto& t = tape_of(a);
  const auto& A = a.data();
  if (static_cast<std::size_t>(A.rows()) != segment.size())
    shape_error("segment_sum", A.rows(), A.cols(), static_cast<Index>(segment.size()), 1);
  Matrix<T> out = Matrix<T>::Zero(static_cast<Index>(num_segments), A.cols());
  for (std::size_t e = 0; e < segment.size(); ++e) {
    if (segment[e] >= num_segments)
      throw Error(ErrorCode::ShapeMismatch, "segment id " + std::to_string(segment[e]) + " out of range");
    out.row(segment[e]) += A.row(static_cast<Index>(e));
  }
  const auto ia = a.id();
  std::vector<std::uint32_t> seg(segment.begin(), segment.end());
  return t.record(std::move(out), [ia, seg = std::move(seg)](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    auto& ga = tp.grad(ia);
    for (std::size_t e = 0; e < seg.size(); ++e) ga.row(static_cast<Index>(e)) += g.row(seg[e]);
  });
}

template <typename T>
Value<T> scale_rows(Value<T> a, Value<T> s) {
  same_tape(a, s);
  auto& t = tape_of(a);
  const auto& A = a.data();
  const auto& S = s.data();
  if (S.cols() != 1 || S.rows() != A.rows()) shape_error("scale_rows", A.rows(), A.cols(), S.rows(), S.cols());
  Matrix<T> out = A.array().colwise() * S.col(0).array();
  const auto ia = a.id(), is = s.id();
  return t.record(std::move(out), [ia, is](Tape<T>& tp, std::uint32_t self) {
    const auto& g = tp.grad_or_empty(self);
    const auto& A = tp.value(ia);
    const auto& S = tp.value(is);
    tp.grad(ia).array() += g.array().colwise() * S.col(0).array();
    tp.grad(is).col(0) += g.cwiseProduct(A).rowwise().sum();
  });
}

template <typename T>
Value<T> sum(Value<T> a) {
  auto& t = tape_of(a);
  Matrix<T> out(1, 1);
  out(0, 0) = a.data().sum();
  const auto ia = a.id();
  return t.record(std::move(out), [ia](Tape<T>& tp, std::uint32_t self) {
    tp.grad(ia).array() += tp.grad_or_empty(self)(0, 0);
  });
}

template <typename T>
Value<T> abs_error_sum(Value<T> a, const Matrix<T>& target, T denominator) {
  auto& t = tape_of(a);
  const auto& A = a.data();
  if (A.rows() != target.rows() || A.cols() != target.cols())
    shape_error("abs_error", A.rows(), A.cols(), target.rows(), target.cols());
  Matrix<T> diff = A - target;
  Matrix<T> out(1, 1);
  out(0, 0) = diff.cwiseAbs().sum() / denominator;
  const auto ia = a.id();
  Matrix<T> sign = diff.unaryExpr([](T x) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
  return t.record(std::move(out), [ia, sign = std::move(sign), denominator](Tape<T>& tp, std::uint32_t self) {
    tp.grad(ia) += sign * (tp.grad_or_empty(self)(0, 0) / denominator);
  });
}

template <typename T>
Value<T> mean_abs_error(Value<T> a, const Matrix<T>& target) {
  if (a.data().size() == 0) throw Error(ErrorCode::ShapeMismatch, "mean_abs_error of an empty value");
  return abs_error_sum(a, target, static_cast<T>(a.data().size()));
}

#define DEEPGATE_INSTANTIATE(T)                                                                                        \
  template class Tape<T>;                                                                                              \
  template Value<T> matmul(Value<T>, Value<T>);                                                                        \
  template Value<T> add(Value<T>, Value<T>);                                                                           \
  template Value<T> sub(Value<T>, Value<T>);                                                                           \
  template Value<T> mul(Value<T>, Value<T>);                                                                           \
  template Value<T> scale(Value<T>, T);                                                                                \
  template Value<T> concat(std::span<const Value<T>>);                                                                 \
  template Value<T> slice_cols(Value<T>, Index, Index);                                                                \
  template Value<T> sigmoid(Value<T>);                                                                                 \
  template Value<T> tanh(Value<T>);                                                                                    \
  template Value<T> relu(Value<T>);                                                                                    \
  template Value<T> grouped_softmax(Value<T>, std::span<const std::uint32_t>, std::size_t);                            \
  template Value<T> gather_rows(Value<T>, std::span<const std::uint32_t>);                                             \
  template Value<T> stack_rows(std::span<const RowRef<T>>);                                                            \
  template Value<T> segment_sum(Value<T>, std::span<const std::uint32_t>, std::size_t);                                \
  template Value<T> scale_rows(Value<T>, Value<T>);                                                                    \
  template Value<T> sum(Value<T>);                                                                                     \
  template Value<T> mean_abs_error(Value<T>, const Matrix<T>&);                                                        \
  template Value<T> abs_error_sum(Value<T>, const Matrix<T>&, T);

DEEPGATE_INSTANTIATE(float)
DEEPGATE_INSTANTIATE(double)

#undef DEEPGATE_INSTANTIATE

} // namespace deepgate::nn
