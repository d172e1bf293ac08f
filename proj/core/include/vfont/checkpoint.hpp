// Copyright 2026 The vfont Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Binary checkpoint layout (little endian):
//
//   "VFCK" u32 version u64 config_hash
//   u32 meta_len, meta bytes          model config and training state, key=value
//   u32 n_tensors, then per tensor: u32 name_len, name, u32 dtype, u32 rows, u32 cols
//   tensor payloads in manifest order (float32)
//   u64 FNV-1a checksum of everything above

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vfont/model.hpp"
#include "vfont/optimizer.hpp"

namespace vfont {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;

  bool operator==(const CheckpointTensor&) const = default;
};

struct Checkpoint {
  ModelConfig config;
  std::int64_t step = 0;
  std::int64_t optimizer_steps = 0;
  bool has_optimizer = false;
  std::vector<CheckpointTensor> tensors;

  bool operator==(const Checkpoint&) const = default;
};

std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t hash = 0xcbf29ce484222325ULL);
std::uint64_t config_hash(const ModelConfig& config);

std::string encode_checkpoint(const Checkpoint& checkpoint,
                              std::uint32_t version = kCheckpointVersion);
Checkpoint decode_checkpoint(const std::string& bytes);

Checkpoint make_checkpoint(const FontStyleModel<float>& model,
                           const Adam<float>* optimizer = nullptr,
                           std::int64_t step = 0);
// Copies tensors into an existing model (and optimizer); ShapeMismatch when
// configs or tensor shapes differ.
void restore_checkpoint(const Checkpoint& checkpoint, FontStyleModel<float>& model,
                        Adam<float>* optimizer = nullptr);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

struct LoadedModel {
  FontStyleModel<float> model;
  std::optional<Adam<float>> optimizer;
  std::int64_t step = 0;
};

void save_checkpoint(const std::filesystem::path& path, const FontStyleModel<float>& model,
                     const Adam<float>* optimizer = nullptr, std::int64_t step = 0);
LoadedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace vfont
