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

// Minimal layer library with hand-written backward passes. Activations are
// packed sequences: an (S * L) x d row-major matrix holding S segments of
// length L. Attention and sequence normalisation act within a segment.
//
// Parameters live in a ParameterSet; layers hold ids into it and never own
// weights, so a forward pass only needs const access and gradients are
// written to a caller-owned GradientSet.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vfont/error.hpp"

namespace vfont::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using ParamId = int;
using Rng = std::mt19937_64;

template <typename T>
class ParameterSet {
 public:
  ParamId add(std::string name, Eigen::Index rows, Eigen::Index cols);

  Matrix<T>& operator[](ParamId id) { return values_[id]; }
  const Matrix<T>& operator[](ParamId id) const { return values_[id]; }
  const std::string& name(ParamId id) const { return names_[id]; }
  int size() const { return static_cast<int>(values_.size()); }
  std::optional<ParamId> find(const std::string& name) const;
  std::size_t element_count() const;

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (int i = 0; i < size(); ++i) {
      const ParamId id = out.add(names_[i], values_[i].rows(), values_[i].cols());
      out[id] = values_[i].template cast<U>();
    }
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix<T>> values_;
};

template <typename T>
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(const ParameterSet<T>& params);

  Matrix<T>& operator[](ParamId id) { return grads_[id]; }
  const Matrix<T>& operator[](ParamId id) const { return grads_[id]; }
  int size() const { return static_cast<int>(grads_.size()); }

  void set_zero();
  void add(const GradientSet& other);
  void scale(T factor);
  double global_norm() const;

 private:
  std::vector<Matrix<T>> grads_;
};

// Counter-based stream so dropout masks depend only on (seed, site) and not
// on evaluation order.
class MaskStream {
 public:
  explicit MaskStream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct DropoutContext {
  bool training = false;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t next_site = 0;

  bool active() const { return training && rate > 0.0; }
};

template <typename T>
struct DropoutMask {
  Matrix<T> scale;  // 0 or 1/(1-p); empty when inactive
};

template <typename T>
Matrix<T> apply_dropout(const Matrix<T>& x, DropoutContext& ctx,
                        DropoutMask<T>* mask);
template <typename T>
Matrix<T> dropout_backward(const Matrix<T>& dy, const DropoutMask<T>& mask);

template <typename T>
class Linear {
 public:
  struct Cache {
    Matrix<T> x;
  };

  Linear() = default;
  Linear(ParameterSet<T>& params, const std::string& name, int in, int out,
         Rng& rng, T weight_scale = T(1));

  Matrix<T> forward(const ParameterSet<T>& params, const Matrix<T>& x,
                    Cache* cache) const;
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     const Matrix<T>& dy, GradientSet<T>& grads) const;

  ParamId weight = -1;  // in x out
  ParamId bias = -1;    // 1 x out
  int in_features = 0;
  int out_features = 0;
};

// Linear -> ReLU -> Linear.
template <typename T>
class Mlp {
 public:
  struct Cache {
    typename Linear<T>::Cache first, second;
    Matrix<T> pre_activation;
  };

  Mlp() = default;
  Mlp(ParameterSet<T>& params, const std::string& name, int in, int hidden,
      int out, Rng& rng, T output_scale = T(1));

  Matrix<T> forward(const ParameterSet<T>& params, const Matrix<T>& x,
                    Cache* cache) const;
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     const Matrix<T>& dy, GradientSet<T>& grads) const;

  Linear<T> first;
  Linear<T> second;
};

// Per-row normalisation over the feature axis.
template <typename T>
class LayerNorm {
 public:
  struct Cache {
    Matrix<T> x_hat;
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
  };

  LayerNorm() = default;
  LayerNorm(ParameterSet<T>& params, const std::string& name, int dim);

  Matrix<T> forward(const ParameterSet<T>& params, const Matrix<T>& x,
                    Cache* cache) const;
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     const Matrix<T>& dy, GradientSet<T>& grads) const;

  ParamId gain = -1;
  ParamId shift = -1;
  static constexpr double kEpsilon = 1e-5;
};

// Normalises each channel over the sequence axis of every segment, then
// applies gamma(z) and beta(z) from two MLPs on the style vector z.
template <typename T>
class AdaIN {
 public:
  static constexpr double kEpsilon = 1e-5;

  struct Cache {
    typename Mlp<T>::Cache gamma_cache, beta_cache;
    RowVector<T> gamma, beta;
    Matrix<T> x_hat;
    Matrix<T> centered;   // x - mu
    Matrix<T> std_dev;    // S x d, sqrt(var) without epsilon
  };

  AdaIN() = default;
  AdaIN(ParameterSet<T>& params, const std::string& name, int dim, Rng& rng);

  // gamma(z), beta(z) for a 1 x d style vector.
  RowVector<T> gamma(const ParameterSet<T>& params, const RowVector<T>& z) const;
  RowVector<T> beta(const ParameterSet<T>& params, const RowVector<T>& z) const;

  Matrix<T> forward(const ParameterSet<T>& params, const Matrix<T>& x,
                    int seq_len, const RowVector<T>& z, Cache* cache) const;
  // Returns dx and accumulates the style gradient into dz.
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     const Matrix<T>& dy, int seq_len, GradientSet<T>& grads,
                     RowVector<T>& dz) const;

  Mlp<T> gamma_mlp;
  Mlp<T> beta_mlp;
};

// Bidirectional multi-head self-attention within each segment.
template <typename T>
class MultiHeadAttention {
 public:
  struct Cache {
    typename Linear<T>::Cache qkv_cache, out_cache;
    Matrix<T> qkv;
    std::vector<Matrix<T>> probs;  // segment-major, then head
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet<T>& params, const std::string& name, int dim,
                     int heads, Rng& rng);

  Matrix<T> forward(const ParameterSet<T>& params, const Matrix<T>& x,
                    int seq_len, Cache* cache) const;
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     const Matrix<T>& dy, int seq_len,
                     GradientSet<T>& grads) const;

  Linear<T> qkv;
  Linear<T> out;
  int dim = 0;
  int heads = 1;
};

enum class NormKind : std::uint8_t { kLayerNorm, kAdaIN };

// Pre-norm block: h = x + drop(attn(n1(x))); y = h + drop(ffn(n2(h))).
template <typename T>
class TransformerBlock {
 public:
  struct Cache {
    typename LayerNorm<T>::Cache ln1, ln2;
    typename AdaIN<T>::Cache ad1, ad2;
    typename MultiHeadAttention<T>::Cache attn;
    typename Mlp<T>::Cache ffn;
    DropoutMask<T> drop1, drop2;
  };

  TransformerBlock() = default;
  TransformerBlock(ParameterSet<T>& params, const std::string& name, int dim,
                   int heads, int mlp_dim, NormKind norm, Rng& rng);

  Matrix<T> forward(const ParameterSet<T>& params, const Matrix<T>& x,
                    int seq_len, const RowVector<T>* z, DropoutContext& drop,
                    Cache* cache) const;
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     const Matrix<T>& dy, int seq_len, GradientSet<T>& grads,
                     RowVector<T>* dz) const;

  NormKind norm = NormKind::kLayerNorm;
  LayerNorm<T> ln1, ln2;
  AdaIN<T> ad1, ad2;
  MultiHeadAttention<T> attn;
  Mlp<T> ffn;
};

struct StackConfig {
  int dim = 256;
  int blocks = 6;
  int heads = 8;
  int mlp_dim = 512;
  NormKind norm = NormKind::kLayerNorm;
  // Block index whose input receives the per-segment injection; -1 for none.
  int inject_at = -1;
};

// Block stack with a final LayerNorm and an optional per-segment additive
// injection (one row per segment, broadcast over its tokens).
template <typename T>
class TransformerStack {
 public:
  struct Cache {
    std::vector<typename TransformerBlock<T>::Cache> blocks;
    typename LayerNorm<T>::Cache final_norm;
  };

  TransformerStack() = default;
  TransformerStack(ParameterSet<T>& params, const std::string& name,
                   const StackConfig& config, Rng& rng);

  Matrix<T> forward(const ParameterSet<T>& params, Matrix<T> x, int seq_len,
                    const RowVector<T>* z, const Matrix<T>* injection,
                    DropoutContext& drop, Cache* cache) const;
  // Returns dx; accumulates dz (AdaIN stacks) and d_injection when given.
  Matrix<T> backward(const ParameterSet<T>& params, const Cache& cache,
                     Matrix<T> dy, int seq_len, GradientSet<T>& grads,
                     RowVector<T>* dz, Matrix<T>* d_injection) const;

  StackConfig config;
  std::vector<TransformerBlock<T>> blocks;
  LayerNorm<T> final_norm;
};

// Mean over each segment: (S * L) x d -> S x d.
template <typename T>
Matrix<T> segment_mean(const Matrix<T>& x, int seq_len);
template <typename T>
Matrix<T> segment_mean_backward(const Matrix<T>& dy, int seq_len);

}  // namespace vfont::nn
