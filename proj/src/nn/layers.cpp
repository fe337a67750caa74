#include "deepgate/nn/layers.hpp"

#include "deepgate/error.hpp"

#include <array>

namespace deepgate::nn {

template <typename T>
LinearParams add_linear(ParameterStore<T>& store, const std::string& prefix, Index in, Index out, Rng& rng,
                        bool bias) {
  LinearParams p;
  p.weight = store.add(prefix + ".weight", in, out, in, rng);
  p.has_bias = bias;
  if (bias) p.bias = store.add(prefix + ".bias", 1, out, in, rng);
  return p;
}

template <typename T>
Value<T> linear(Tape<T>& tape, const ParameterStore<T>& store, const LinearParams& p, Value<T> x) {
  auto y = matmul(x, tape.parameter(store, p.weight));
  if (p.has_bias) y = add(y, tape.parameter(store, p.bias));
  return y;
}

template <typename T>
MlpParams add_mlp(ParameterStore<T>& store, const std::string& prefix, const std::vector<Index>& widths, Rng& rng) {
  if (widths.size() < 2) throw Error(ErrorCode::ShapeMismatch, "an MLP needs at least two widths");
  MlpParams p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    p.layers.push_back(add_linear(store, prefix + "." + std::to_string(i), widths[i], widths[i + 1], rng));
  return p;
}

template <typename T>
Value<T> mlp(Tape<T>& tape, const ParameterStore<T>& store, const MlpParams& p, Value<T> x) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    x = linear(tape, store, p.layers[i], x);
    if (i + 1 < p.layers.size()) x = relu(x);
  }
  return x;
}

template <typename T>
GruParams add_gru(ParameterStore<T>& store, const std::string& prefix, Index input, Index hidden, Rng& rng) {
  GruParams p;
  p.input = input;
  p.hidden = hidden;
  const Index fan_in = input + hidden;
  p.w_zr = store.add(prefix + ".w_zr", fan_in, 2 * hidden, fan_in, rng);
  p.b_zr = store.add(prefix + ".b_zr", 1, 2 * hidden, fan_in, rng);
  p.w_n = store.add(prefix + ".w_n", fan_in, hidden, fan_in, rng);
  p.b_n = store.add(prefix + ".b_n", 1, hidden, fan_in, rng);
  return p;
}

template <typename T>
Value<T> gru_cell(Tape<T>& tape, const ParameterStore<T>& store, const GruParams& p, Value<T> x, Value<T> h) {
  if (x.cols() != p.input || h.cols() != p.hidden || x.rows() != h.rows())
    throw Error(ErrorCode::ShapeMismatch, "gru_cell input " + std::to_string(x.rows()) + "x" +
                                              std::to_string(x.cols()) + ", state " + std::to_string(h.rows()) +
                                              "x" + std::to_string(h.cols()));
  const std::array<Value<T>, 2> xh{x, h};
  auto zr = sigmoid(add(matmul(concat<T>(xh), tape.parameter(store, p.w_zr)), tape.parameter(store, p.b_zr)));
  auto z = slice_cols(zr, 0, p.hidden);
  auto r = slice_cols(zr, p.hidden, p.hidden);
  const std::array<Value<T>, 2> xrh{x, mul(r, h)};
  auto n = tanh(add(matmul(concat<T>(xrh), tape.parameter(store, p.w_n)), tape.parameter(store, p.b_n)));
  return add(n, mul(z, sub(h, n)));
}

#define DEEPGATE_INSTANTIATE(T)                                                                                        \
  template LinearParams add_linear(ParameterStore<T>&, const std::string&, Index, Index, Rng&, bool);                  \
  template Value<T> linear(Tape<T>&, const ParameterStore<T>&, const LinearParams&, Value<T>);                         \
  template MlpParams add_mlp(ParameterStore<T>&, const std::string&, const std::vector<Index>&, Rng&);                 \
  template Value<T> mlp(Tape<T>&, const ParameterStore<T>&, const MlpParams&, Value<T>);                               \
  template GruParams add_gru(ParameterStore<T>&, const std::string&, Index, Index, Rng&);                              \
  template Value<T> gru_cell(Tape<T>&, const ParameterStore<T>&, const GruParams&, Value<T>, Value<T>);

DEEPGATE_INSTANTIATE(float)
DEEPGATE_INSTANTIATE(double)

#undef DEEPGATE_INSTANTIATE

} // namespace deepgate::nn
