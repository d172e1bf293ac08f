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

// Hierarchical style-transfer network.
//
//   encoder: E1 runs over each style path (command tokens), mean-pooled to
//            one vector per path; E2 runs over those path vectors and is
//            mean-pooled into the style feature z.
//   decoder: D2 runs over per-path mean content embeddings and yields path
//            features w_i plus visibility logits; D1 runs over each content
//            path's command tokens, receives an affine map of w_i at the
//            input of its middle block, and emits command-type logits and
//            arguments in [0, 255]. Every decoder normalisation is AdaIN on z.
//
// Everything is feed-forward; attention is unmasked.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vfont/embedding.hpp"
#include "vfont/nn.hpp"
#include "vfont/svg.hpp"

namespace vfont {

struct ModelConfig {
  int n_paths = 12;
  int n_cmds = 100;
  int dim = 256;
  int blocks = 6;
  int heads = 8;
  int mlp_dim = 512;
  double dropout = 0.1;
  // Block of D1 whose input receives the path feature; 3 == fourth of six.
  int inject_block = 3;

  bool operator==(const ModelConfig&) const = default;

  // "key=value" lines; the same keys are accepted by from_text.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);
  void check() const;
};

// Decoder output. Rows that were not decoded (see `decoded`) hold zeros.
// The same layout doubles as the gradient of a loss w.r.t. a prediction.
struct Prediction {
  int n_paths = 0;
  int n_cmds = 0;
  std::vector<double> visibility_logits;  // n_paths x 2
  std::vector<double> command_logits;     // n_paths x n_cmds x 6
  std::vector<double> args;               // n_paths x n_cmds x 6, in [0, 255]
  std::vector<std::uint8_t> decoded;      // n_paths

  static Prediction zeros(int n_paths, int n_cmds);

  double& vis(int path, int cls) { return visibility_logits[path * 2 + cls]; }
  double vis(int path, int cls) const { return visibility_logits[path * 2 + cls]; }
  double& cmd(int path, int j, int cls) {
    return command_logits[(static_cast<std::size_t>(path) * n_cmds + j) *
                              kNumCommandTypes +
                          cls];
  }
  double cmd(int path, int j, int cls) const {
    return command_logits[(static_cast<std::size_t>(path) * n_cmds + j) *
                              kNumCommandTypes +
                          cls];
  }
  double& arg(int path, int j, int slot) {
    return args[(static_cast<std::size_t>(path) * n_cmds + j) * kNumArgs + slot];
  }
  double arg(int path, int j, int slot) const {
    return args[(static_cast<std::size_t>(path) * n_cmds + j) * kNumArgs + slot];
  }
};

template <typename T>
struct StyleFeature {
  nn::RowVector<T> z;
};

template <typename T>
class FontStyleModel {
 public:
  // Activation caches of one forward pass, consumed by backward().
  struct Trace {
    std::vector<int> style_slots;      // unique style rows fed to E1
    std::vector<int> style_row_slot;   // padded row -> index in style_slots
    typename Embedding<T>::Cache enc_embed;
    typename nn::TransformerStack<T>::Cache e1, e2;
    nn::RowVector<T> z;
    std::vector<int> rows;             // decoded content rows
    typename Embedding<T>::Cache dec_embed;
    typename nn::TransformerStack<T>::Cache d2, d1;
    typename nn::Linear<T>::Cache inject;
    typename nn::Mlp<T>::Cache visibility_head, command_head, args_head;
    nn::Matrix<T> args_sigmoid;        // (rows * n_cmds) x 6
  };

  FontStyleModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  const Embedding<T>& encoder_embedding() const { return enc_embed_; }
  const Embedding<T>& decoder_embedding() const { return dec_embed_; }
  const nn::TransformerStack<T>& decoder_path_stack() const { return d2_; }

  StyleFeature<T> encode(const PaddedGlyph& style) const;

  // Decodes the listed rows (all rows when empty).
  Prediction decode(const PaddedGlyph& content, const StyleFeature<T>& style,
                    std::span<const int> rows = {}) const;

  // decode(content, encode(style)) assembled into a glyph: visible paths
  // only, each truncated at its first predicted EOS.
  Glyph generate(const PaddedGlyph& content, const PaddedGlyph& style) const;

  // Training forward: encode + decode of `rows`, caching activations.
  Prediction forward(const PaddedGlyph& style, const PaddedGlyph& content,
                     std::span<const int> rows, nn::DropoutContext& dropout,
                     Trace& trace) const;
  // Accumulates parameter gradients given dLoss/dPrediction.
  void backward(const Trace& trace, const Prediction& grad,
                nn::GradientSet<T>& grads) const;

 private:
  StyleFeature<T> encode_impl(const PaddedGlyph& style, nn::DropoutContext& drop,
                              Trace* trace) const;
  Prediction decode_impl(const PaddedGlyph& content, const StyleFeature<T>& style,
                         std::span<const int> rows, nn::DropoutContext& drop,
                         Trace* trace) const;

  ModelConfig config_;
  nn::ParameterSet<T> params_;
  Embedding<T> enc_embed_;
  Embedding<T> dec_embed_;
  nn::TransformerStack<T> e1_, e2_, d1_, d2_;
  nn::Linear<T> inject_;
  nn::Mlp<T> visibility_head_, command_head_, args_head_;
};

// Converts a prediction into a glyph (argmax visibility and command types,
// unused slots forced to -1). Leading non-M commands are skipped so every
// path starts with M.
Glyph assemble_glyph(const Prediction& prediction);

}  // namespace vfont
