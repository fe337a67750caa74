#pragma once

#include "deepgate/nn/parameters.hpp"
#include "deepgate/nn/tape.hpp"

#include <string>
#include <vector>

namespace deepgate::nn {

/// Indices of an affine map's parameters inside a store.
struct LinearParams {
  std::size_t weight = 0; // in x out
  std::size_t bias = 0;   // 1 x out
  bool has_bias = true;
};

template <typename T>
LinearParams add_linear(ParameterStore<T>& store, const std::string& prefix, Index in, Index out, Rng& rng,
                        bool bias = true);

template <typename T>
Value<T> linear(Tape<T>& tape, const ParameterStore<T>& store, const LinearParams& p, Value<T> x);

/// Affine layers with ReLU between them and no activation after the last.
struct MlpParams {
  std::vector<LinearParams> layers;
};

template <typename T>
MlpParams add_mlp(ParameterStore<T>& store, const std::string& prefix, const std::vector<Index>& widths, Rng& rng);

template <typename T>
Value<T> mlp(Tape<T>& tape, const ParameterStore<T>& store, const MlpParams& p, Value<T> x);

/// Gated recurrent unit:
///   [z r] = sigmoid([x h] W_zr + b_zr)
///   n     = tanh([x, r*h] W_n + b_n)
///   h'    = (1 - z) * n + z * h
struct GruParams {
  std::size_t w_zr = 0;
  std::size_t b_zr = 0;
  std::size_t w_n = 0;
  std::size_t b_n = 0;
  Index input = 0;
  Index hidden = 0;
};

template <typename T>
GruParams add_gru(ParameterStore<T>& store, const std::string& prefix, Index input, Index hidden, Rng& rng);

template <typename T>
Value<T> gru_cell(Tape<T>& tape, const ParameterStore<T>& store, const GruParams& p, Value<T> x, Value<T> h);

} // namespace deepgate::nn
