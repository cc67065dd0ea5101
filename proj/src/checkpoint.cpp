#include "sonarfuse/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "sonarfuse/error.hpp"
#include "sonarfuse/image_io.hpp"

namespace sonarfuse::nn {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("checkpoint: truncated data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

Tensor as_matrix(std::size_t rows, std::size_t cols, const std::vector<double>& values) {
  return Tensor({rows, cols}, values);
}

}  // namespace

std::string encode_checkpoint(const std::vector<NamedTensor>& tensors) {
  std::string out = "SSNN";
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, tensors.size());
  for (const auto& nt : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(nt.name.size()));
    out += nt.name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(nt.tensor.rank()));
    for (std::size_t d : nt.tensor.shape()) put_le<std::uint64_t>(out, d);
    for (double v : nt.tensor.data()) put_f64(out, v);
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.raw(4) != "SSNN") throw IoError("checkpoint: bad magic");
  const auto version = in.le<std::uint32_t>();
  if (version != kCheckpointVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = in.le<std::uint64_t>();
  std::vector<NamedTensor> tensors;
  for (std::uint64_t t = 0; t < count; ++t) {
    NamedTensor nt;
    nt.name = in.raw(in.le<std::uint32_t>());
    const auto rank = in.le<std::uint32_t>();
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(in.le<std::uint64_t>());
      n *= d;
    }
    std::vector<double> data(n);
    for (double& v : data) v = in.f64();
    nt.tensor = Tensor(std::move(shape), std::move(data));
    tensors.push_back(std::move(nt));
  }
  if (!in.done()) throw IoError("checkpoint: trailing bytes");
  return tensors;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p += ".json";
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors,
                     const nlohmann::json& hyperparameters) {
  io::write_bytes_atomic(path, encode_checkpoint(tensors));
  io::write_text_atomic(sidecar_path(path), hyperparameters.dump(2) + "\n");
}

const Tensor& LoadedCheckpoint::get(const std::string& name) const {
  for (const auto& nt : tensors)
    if (nt.name == name) return nt.tensor;
  throw IoError("checkpoint: missing tensor '" + name + "'");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  LoadedCheckpoint ckpt;
  ckpt.tensors = decode_checkpoint(io::read_text(path));
  const auto sidecar = sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    try {
      ckpt.hyperparameters = nlohmann::json::parse(io::read_text(sidecar));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError("checkpoint sidecar " + sidecar.string() + ": " + e.what());
    }
  }
  return ckpt;
}

void append_tensors(const std::string& prefix, const MlpParams& mlp, std::vector<NamedTensor>& out) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const auto& l = mlp.layers[i];
    const std::string base = prefix + ".layers." + std::to_string(i);
    out.push_back({base + ".weight", as_matrix(l.outputs, l.inputs, l.weight)});
    out.push_back({base + ".bias", Tensor({l.outputs}, l.bias)});
  }
}

MlpParams read_mlp(const std::string& prefix, const LoadedCheckpoint& ckpt) {
  MlpParams mlp;
  for (std::size_t i = 0;; ++i) {
    const std::string base = prefix + ".layers." + std::to_string(i);
    const NamedTensor* weight = nullptr;
    for (const auto& nt : ckpt.tensors)
      if (nt.name == base + ".weight") weight = &nt;
    if (!weight) break;
    const Tensor& bias = ckpt.get(base + ".bias");
    if (weight->tensor.rank() != 2) throw IoError("checkpoint: " + base + ".weight is not a matrix");
    DenseLayer layer;
    layer.outputs = weight->tensor.dim(0);
    layer.inputs = weight->tensor.dim(1);
    layer.weight.assign(weight->tensor.data().begin(), weight->tensor.data().end());
    layer.bias.assign(bias.data().begin(), bias.data().end());
    mlp.layers.push_back(std::move(layer));
  }
  if (mlp.layers.empty()) throw IoError("checkpoint: no layers under '" + prefix + "'");
  try {
    mlp.validate();
  } catch (const DomainError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  return mlp;
}

void append_tensors(const std::string& prefix, const SeGateParams& se, std::vector<NamedTensor>& out) {
  out.push_back({prefix + ".w1", as_matrix(se.reduced, se.channels, se.w1)});
  out.push_back({prefix + ".w2", as_matrix(se.channels, se.reduced, se.w2)});
}

SeGateParams read_se(const std::string& prefix, const LoadedCheckpoint& ckpt) {
  const Tensor& w1 = ckpt.get(prefix + ".w1");
  const Tensor& w2 = ckpt.get(prefix + ".w2");
  if (w1.rank() != 2 || w2.rank() != 2) throw IoError("checkpoint: SE matrices must be rank 2");
  SeGateParams se;
  se.reduced = w1.dim(0);
  se.channels = w1.dim(1);
  se.w1.assign(w1.data().begin(), w1.data().end());
  se.w2.assign(w2.data().begin(), w2.data().end());
  try {
    se.validate();
  } catch (const DomainError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  return se;
}

}  // namespace sonarfuse::nn
