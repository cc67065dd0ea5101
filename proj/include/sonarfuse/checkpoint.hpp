#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/nn.hpp"

namespace sonarfuse::nn {

// Binary layout (all integers and doubles little-endian):
//   "SSNN" | u32 version | u64 tensor count
//   per tensor: u32 name length | name bytes | u32 rank | u64 dims[rank] | f64 values[prod(dims)]

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

std::string encode_checkpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_checkpoint(const std::string& bytes);

/// Writes `path` and a JSON sidecar `path` + ".json" holding `hyperparameters`.
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors,
                     const nlohmann::json& hyperparameters);

struct LoadedCheckpoint {
  std::vector<NamedTensor> tensors;
  nlohmann::json hyperparameters;

  const Tensor& get(const std::string& name) const;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

// Helpers to flatten model pieces into named tensors.
void append_tensors(const std::string& prefix, const MlpParams& mlp, std::vector<NamedTensor>& out);
MlpParams read_mlp(const std::string& prefix, const LoadedCheckpoint& ckpt);
void append_tensors(const std::string& prefix, const SeGateParams& se, std::vector<NamedTensor>& out);
SeGateParams read_se(const std::string& prefix, const LoadedCheckpoint& ckpt);

}  // namespace sonarfuse::nn
