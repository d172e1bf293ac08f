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

#include "vfont/embedding.hpp"

namespace vfont {

std::array<double, kCoordFeatures> coordinate_features(const Command& cmd) {
  std::array<double, kCoordFeatures> f{};
  for (int slot = 0; slot < kNumArgs; ++slot) {
    if (!uses_slot(cmd.kind, slot)) continue;
    f[slot] = cmd.args[slot] / kCoordMax;
    f[kNumArgs + slot] = 1.0;
  }
  return f;
}

template <typename T>
Embedding<T>::Embedding(nn::ParameterSet<T>& params, const std::string& name,
                        int dim_, int n_paths_, int n_cmds_, nn::Rng& rng)
    : dim(dim_), n_paths(n_paths_), n_cmds(n_cmds_) {
  type_table = params.add(name + ".type_table", kNumCommandTypes, dim);
  coord_proj = nn::Linear<T>(params, name + ".coord_proj", kCoordFeatures, dim, rng);
  index_table_cmd = params.add(name + ".index_cmd", n_cmds, dim);
  index_table_path = params.add(name + ".index_path", n_paths, dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (nn::ParamId id : {type_table, index_table_cmd, index_table_path}) {
    auto& m = params[id];
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<T>(normal(rng));
  }
}

template <typename T>
nn::Matrix<T> Embedding<T>::embed_rows(const nn::ParameterSet<T>& params,
                                       const PaddedGlyph& glyph,
                                       std::span<const int> rows,
                                       Cache* cache) const {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size()) * glyph.n_cmds;
  nn::Matrix<T> features(n, kCoordFeatures);
  std::vector<CommandType> kinds(static_cast<std::size_t>(n));
  Eigen::Index r = 0;
  for (int row : rows) {
    for (int j = 0; j < glyph.n_cmds; ++j, ++r) {
      const CommandType kind = glyph.type(row, j);
      kinds[r] = kind;
      for (int slot = 0; slot < kNumArgs; ++slot) {
        const bool used = uses_slot(kind, slot);
        features(r, slot) =
            used ? static_cast<T>(glyph.arg(row, j, slot) / kCoordMax) : T(0);
        features(r, kNumArgs + slot) = used ? T(1) : T(0);
      }
    }
  }
  nn::Matrix<T> out =
      coord_proj.forward(params, features, cache ? &cache->coord : nullptr);
  const auto& table = params[type_table];
  for (Eigen::Index k = 0; k < n; ++k) {
    out.row(k) += table.row(static_cast<int>(kinds[k]));
  }
  if (cache) cache->kinds = std::move(kinds);
  return out;
}

template <typename T>
void Embedding<T>::embed_rows_backward(const nn::ParameterSet<T>& params,
                                       const Cache& cache,
                                       const nn::Matrix<T>& dy,
                                       nn::GradientSet<T>& grads) const {
  auto& table = grads[type_table];
  for (std::size_t k = 0; k < cache.kinds.size(); ++k) {
    table.row(static_cast<int>(cache.kinds[k])) +=
        dy.row(static_cast<Eigen::Index>(k));
  }
  // The coordinate features are data, so the input gradient is dropped.
  grads[coord_proj.weight].noalias() += cache.coord.x.transpose() * dy;
  grads[coord_proj.bias] += dy.colwise().sum();
  (void)params;
}

template <typename T>
void Embedding<T>::add_command_index(const nn::ParameterSet<T>& params,
                                     nn::Matrix<T>& x) const {
  const auto& table = params[index_table_cmd];
  for (Eigen::Index s = 0; s < x.rows() / n_cmds; ++s) {
    x.middleRows(s * n_cmds, n_cmds) += table;
  }
}

template <typename T>
void Embedding<T>::add_command_index_backward(const nn::Matrix<T>& dy,
                                              nn::GradientSet<T>& grads) const {
  auto& g = grads[index_table_cmd];
  for (Eigen::Index s = 0; s < dy.rows() / n_cmds; ++s) {
    g += dy.middleRows(s * n_cmds, n_cmds);
  }
}

template <typename T>
void Embedding<T>::add_path_index(const nn::ParameterSet<T>& params,
                                  nn::Matrix<T>& x) const {
  x += params[index_table_path];
}

template <typename T>
void Embedding<T>::add_path_index_backward(const nn::Matrix<T>& dy,
                                           nn::GradientSet<T>& grads) const {
  grads[index_table_path] += dy;
}

template <typename T>
nn::RowVector<T> embed_command(const Command& cmd, const Embedding<T>& embedding,
                               const nn::ParameterSet<T>& params) {
  const auto f = coordinate_features(cmd);
  nn::Matrix<T> features(1, kCoordFeatures);
  for (int k = 0; k < kCoordFeatures; ++k) features(0, k) = static_cast<T>(f[k]);
  nn::Matrix<T> out = embedding.coord_proj.forward(params, features, nullptr);
  out.row(0) += params[embedding.type_table].row(static_cast<int>(cmd.kind));
  return out.row(0);
}

template <typename T>
nn::Matrix<T> embed_path_sequence(const PaddedGlyph& glyph, int path,
                                  const Embedding<T>& embedding,
                                  const nn::ParameterSet<T>& params) {
  const int rows[] = {path};
  nn::Matrix<T> x = embedding.embed_rows(params, glyph, rows, nullptr);
  embedding.add_command_index(params, x);
  return x;
}

#define VFONT_INSTANTIATE_EMBEDDING(T)                                        \
  template class Embedding<T>;                                                \
  template nn::RowVector<T> embed_command<T>(                                 \
      const Command&, const Embedding<T>&, const nn::ParameterSet<T>&);       \
  template nn::Matrix<T> embed_path_sequence<T>(                              \
      const PaddedGlyph&, int, const Embedding<T>&, const nn::ParameterSet<T>&);

VFONT_INSTANTIATE_EMBEDDING(float)
VFONT_INSTANTIATE_EMBEDDING(double)

#undef VFONT_INSTANTIATE_EMBEDDING

}  // namespace vfont
