#include "deepgate/nn/parameters.hpp"

#include "deepgate/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace deepgate::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

// ---------------------------------------------------------------------------
// ParameterStore

template <typename T>
std::size_t ParameterStore<T>::add(std::string name, Index rows, Index cols, Index fan_in, Rng& rng) {
  if (fan_in <= 0) throw Error(ErrorCode::DomainError, "fan_in must be positive for " + name);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix<T> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((2.0 * uniform01(rng) - 1.0) * bound);
  if (by_name_.contains(name)) throw Error(ErrorCode::DuplicateDefinition, "parameter " + name);
  by_name_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(m), true});
  return entries_.size() - 1;
}

template <typename T>
std::size_t ParameterStore<T>::add_buffer(std::string name, Matrix<T> value) {
  if (by_name_.contains(name)) throw Error(ErrorCode::DuplicateDefinition, "parameter " + name);
  by_name_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(value), false});
  return entries_.size() - 1;
}

template <typename T>
std::size_t ParameterStore<T>::index(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw Error(ErrorCode::ConfigMismatch, "no parameter named " + std::string(name));
  return it->second;
}

template <typename T>
std::size_t ParameterStore<T>::count_parameters() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.trainable) n += static_cast<std::size_t>(e.value.size());
  return n;
}

template <typename T>
std::map<std::string, std::size_t> ParameterStore<T>::count_by_group() const {
  std::map<std::string, std::size_t> out;
  for (const auto& e : entries_) {
    if (!e.trainable) continue;
    const auto dot = e.name.rfind('.');
    out[dot == std::string::npos ? e.name : e.name.substr(0, dot)] += static_cast<std::size_t>(e.value.size());
  }
  return out;
}

template <typename T>
template <typename U>
void ParameterStore<T>::assign_from(const ParameterStore<U>& other) {
  if (other.size() != size()) throw Error(ErrorCode::ConfigMismatch, "parameter stores differ in size");
  for (std::size_t i = 0; i < other.size(); ++i) {
    const auto& src = other[i];
    auto& dst = entries_[index(src.name)];
    if (dst.value.rows() != src.value.rows() || dst.value.cols() != src.value.cols())
      throw Error(ErrorCode::ConfigMismatch, "shape mismatch for " + src.name);
    dst.value = src.value.template cast<T>();
  }
}

// ---------------------------------------------------------------------------
// Gradients and ADAM

template <typename T>
Gradients<T>::Gradients(const ParameterStore<T>& store) {
  grads.reserve(store.size());
  for (const auto& e : store) grads.push_back(Matrix<T>::Zero(e.value.rows(), e.value.cols()));
}

template <typename T>
void Gradients<T>::zero() {
  for (auto& g : grads) g.setZero();
}

template <typename T>
void Gradients<T>::add(const Gradients& other) {
  for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += other.grads[i];
}

template <typename T>
void Gradients<T>::scale(T factor) {
  for (auto& g : grads) g *= factor;
}

template <typename T>
AdamState<T>::AdamState(const ParameterStore<T>& store, AdamConfig cfg) : config(cfg) {
  for (const auto& e : store) {
    m.push_back(Matrix<T>::Zero(e.value.rows(), e.value.cols()));
    v.push_back(Matrix<T>::Zero(e.value.rows(), e.value.cols()));
  }
}

template <typename T>
void adam_step(ParameterStore<T>& params, const Gradients<T>& grads, AdamState<T>& state) {
  if (state.m.size() != params.size() || grads.grads.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "optimiser state does not match parameters");
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
  const T corr2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
  const T lr = static_cast<T>(c.lr);
  const T eps = static_cast<T>(c.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    const auto& g = grads.grads[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
    params.value(i).array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'D', 'G', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename I>
void put(std::ostream& out, I v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename I>
I get(std::istream& in) {
  I v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) throw Error(ErrorCode::FormatError, "truncated checkpoint");
  return v;
}

template <typename T>
void put_array(std::ostream& out, const std::string& name, bool trainable, const Matrix<T>& m) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint32_t>(out, trainable ? 1u : 0u);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(T)));
}

template <typename T>
Matrix<T> to_matrix(const CheckpointArray& a) {
  Matrix<T> m(a.rows, a.cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(a.data[static_cast<std::size_t>(i)]);
  return m;
}

} // namespace

template <typename T>
void write_checkpoint(std::ostream& out, const nlohmann::json& meta, const ParameterStore<T>& params,
                      const AdamState<T>* adam) {
  nlohmann::json m = meta;
  if (adam != nullptr) m["adam_step"] = adam->step;
  const std::string text = m.dump();
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, sizeof(T));
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<std::size_t> moment_ids;
  if (adam != nullptr)
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].trainable) moment_ids.push_back(i);
  put<std::uint64_t>(out, params.size() + 2 * moment_ids.size());
  for (const auto& e : params) put_array(out, e.name, e.trainable, e.value);
  for (std::size_t i : moment_ids) {
    put_array(out, "adam.m/" + params[i].name, false, adam->m[i]);
    put_array(out, "adam.v/" + params[i].name, false, adam->v[i]);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed to write checkpoint");
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta, const ParameterStore<T>& params,
                     const AdamState<T>* adam) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
    write_checkpoint(out, meta, params, adam);
  }
  std::filesystem::rename(tmp, path);
}

const CheckpointArray* CheckpointContents::find(std::string_view name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

CheckpointContents read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw Error(ErrorCode::FormatError, "not a checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw Error(ErrorCode::FormatError, "unsupported checkpoint version " + std::to_string(version));
  CheckpointContents out;
  out.scalar_width = get<std::uint32_t>(in);
  if (out.scalar_width != 4 && out.scalar_width != 8)
    throw Error(ErrorCode::FormatError, "unsupported scalar width " + std::to_string(out.scalar_width));
  const auto meta_len = get<std::uint64_t>(in);
  std::string text(meta_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(meta_len)))
    throw Error(ErrorCode::FormatError, "truncated checkpoint metadata");
  try {
    out.meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("checkpoint metadata: ") + e.what());
  }
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < count; ++k) {
    CheckpointArray a;
    const auto name_len = get<std::uint32_t>(in);
    a.name.resize(name_len);
    if (!in.read(a.name.data(), name_len)) throw Error(ErrorCode::FormatError, "truncated array name");
    a.trainable = (get<std::uint32_t>(in) & 1u) != 0;
    a.rows = static_cast<Index>(get<std::uint64_t>(in));
    a.cols = static_cast<Index>(get<std::uint64_t>(in));
    const auto n = static_cast<std::size_t>(a.rows * a.cols);
    a.data.resize(n);
    if (out.scalar_width == 4) {
      std::vector<float> buf(n);
      if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4)))
        throw Error(ErrorCode::FormatError, "truncated array " + a.name);
      for (std::size_t i = 0; i < n; ++i) a.data[i] = buf[i];
    } else if (!in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(n * 8))) {
      throw Error(ErrorCode::FormatError, "truncated array " + a.name);
    }
    out.arrays.push_back(std::move(a));
  }
  return out;
}

CheckpointContents load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_checkpoint(in);
}

template <typename T>
void restore_parameters(const CheckpointContents& ckpt, ParameterStore<T>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& e = params[i];
    const auto* a = ckpt.find(e.name);
    if (a == nullptr) throw Error(ErrorCode::ConfigMismatch, "checkpoint lacks parameter " + e.name);
    if (a->rows != e.value.rows() || a->cols != e.value.cols())
      throw Error(ErrorCode::ConfigMismatch, "checkpoint shape mismatch for " + e.name);
    e.value = to_matrix<T>(*a);
  }
  std::size_t stored = 0;
  for (const auto& a : ckpt.arrays)
    if (!a.name.starts_with("adam.")) ++stored;
  if (stored != params.size()) throw Error(ErrorCode::ConfigMismatch, "checkpoint holds extra parameters");
}

template <typename T>
std::optional<AdamState<T>> restore_adam(const CheckpointContents& ckpt, const ParameterStore<T>& params,
                                         AdamConfig config) {
  if (!ckpt.meta.contains("adam_step")) return std::nullopt;
  AdamState<T> state(params, config);
  state.step = ckpt.meta.at("adam_step").get<std::uint64_t>();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    const auto* m = ckpt.find("adam.m/" + params[i].name);
    const auto* v = ckpt.find("adam.v/" + params[i].name);
    if (m == nullptr || v == nullptr) throw Error(ErrorCode::ConfigMismatch, "checkpoint lacks moments for " + params[i].name);
    state.m[i] = to_matrix<T>(*m);
    state.v[i] = to_matrix<T>(*v);
  }
  return state;
}

#define DEEPGATE_INSTANTIATE(T)                                                                                        \
  template class ParameterStore<T>;                                                                                    \
  template struct Gradients<T>;                                                                                        \
  template struct AdamState<T>;                                                                                        \
  template void adam_step(ParameterStore<T>&, const Gradients<T>&, AdamState<T>&);                                     \
  template void write_checkpoint(std::ostream&, const nlohmann::json&, const ParameterStore<T>&, const AdamState<T>*); \
  template void save_checkpoint(const std::filesystem::path&, const nlohmann::json&, const ParameterStore<T>&,         \
                                const AdamState<T>*);                                                                  \
  template void restore_parameters(const CheckpointContents&, ParameterStore<T>&);                                    \
  template std::optional<AdamState<T>> restore_adam(const CheckpointContents&, const ParameterStore<T>&, AdamConfig);

DEEPGATE_INSTANTIATE(float)
DEEPGATE_INSTANTIATE(double)

#undef DEEPGATE_INSTANTIATE

template void ParameterStore<float>::assign_from(const ParameterStore<float>&);
template void ParameterStore<float>::assign_from(const ParameterStore<double>&);
template void ParameterStore<double>::assign_from(const ParameterStore<float>&);
template void ParameterStore<double>::assign_from(const ParameterStore<double>&);

} // namespace deepgate::nn
