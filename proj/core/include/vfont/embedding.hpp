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

// Command embeddings: e = type_table[kind] + coord_proj(features), where the
// 12 features are the six arguments scaled by 1/255 (unused slots -> 0)
// followed by six presence bits. Index embeddings are added per position.

#include <array>
#include <span>
#include <string>

#include "vfont/nn.hpp"
#include "vfont/svg.hpp"

namespace vfont {

inline constexpr int kCoordFeatures = 2 * kNumArgs;

std::array<double, kCoordFeatures> coordinate_features(const Command& cmd);

template <typename T>
class Embedding {
 public:
  struct Cache {
    typename nn::Linear<T>::Cache coord;
    std::vector<CommandType> kinds;
  };

  Embedding() = default;
  Embedding(nn::ParameterSet<T>& params, const std::string& name, int dim,
            int n_paths, int n_cmds, nn::Rng& rng);

  // Type + coordinate embeddings of every command in the listed rows,
  // packed as (rows.size() * n_cmds) x dim. No index embeddings.
  nn::Matrix<T> embed_rows(const nn::ParameterSet<T>& params,
                           const PaddedGlyph& glyph, std::span<const int> rows,
                           Cache* cache) const;
  void embed_rows_backward(const nn::ParameterSet<T>& params,
                           const Cache& cache, const nn::Matrix<T>& dy,
                           nn::GradientSet<T>& grads) const;

  // In-place add of command-index rows to each length-n_cmds segment.
  void add_command_index(const nn::ParameterSet<T>& params,
                         nn::Matrix<T>& x) const;
  void add_command_index_backward(const nn::Matrix<T>& dy,
                                  nn::GradientSet<T>& grads) const;

  // In-place add of path-index rows to an n_paths x dim matrix.
  void add_path_index(const nn::ParameterSet<T>& params, nn::Matrix<T>& x) const;
  void add_path_index_backward(const nn::Matrix<T>& dy,
                               nn::GradientSet<T>& grads) const;

  int dim = 0;
  int n_paths = 0;
  int n_cmds = 0;
  nn::ParamId type_table = -1;        // 6 x dim
  nn::Linear<T> coord_proj;           // 12 -> dim
  nn::ParamId index_table_cmd = -1;   // n_cmds x dim
  nn::ParamId index_table_path = -1;  // n_paths x dim
};

template <typename T>
nn::RowVector<T> embed_command(const Command& cmd, const Embedding<T>& embedding,
                               const nn::ParameterSet<T>& params);

// Row `path` of a padded glyph: element j is embed_command(cmd_j) plus the
// command-index embedding j.
template <typename T>
nn::Matrix<T> embed_path_sequence(const PaddedGlyph& glyph, int path,
                                  const Embedding<T>& embedding,
                                  const nn::ParameterSet<T>& params);

}  // namespace vfont
