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

#include "vfont/nn.hpp"

#include <cmath>

namespace vfont::nn {

// ---------------------------------------------------------------------------
// Parameters and gradients

template <typename T>
ParamId ParameterSet<T>::add(std::string name, Eigen::Index rows,
                             Eigen::Index cols) {
  names_.push_back(std::move(name));
  values_.push_back(Matrix<T>::Zero(rows, cols));
  return static_cast<ParamId>(values_.size() - 1);
}

template <typename T>
std::optional<ParamId> ParameterSet<T>::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

template <typename T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

template <typename T>
GradientSet<T>::GradientSet(const ParameterSet<T>& params) {
  grads_.reserve(params.size());
  for (int i = 0; i < params.size(); ++i) {
    grads_.push_back(Matrix<T>::Zero(params[i].rows(), params[i].cols()));
  }
}

template <typename T>
void GradientSet<T>::set_zero() {
  for (auto& g : grads_) g.setZero();
}

template <typename T>
void GradientSet<T>::add(const GradientSet& other) {
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i] += other.grads_[i];
}

template <typename T>
void GradientSet<T>::scale(T factor) {
  for (auto& g : grads_) g *= factor;
}

template <typename T>
double GradientSet<T>::global_norm() const {
  double sum = 0.0;
  for (const auto& g : grads_) {
    sum += static_cast<double>(g.template cast<double>().squaredNorm());
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Dropout

std::uint64_t MaskStream::next() {
  // SplitMix64.
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  MaskStream s(a ^ (b * 0xD1B54A32D192ED03ULL));
  s.next();
  return s.next();
}

template <typename T>
Matrix<T> apply_dropout(const Matrix<T>& x, DropoutContext& ctx,
                        DropoutMask<T>* mask) {
  if (!ctx.active()) {
    if (mask) mask->scale.resize(0, 0);
    return x;
  }
  MaskStream stream(mix_seed(ctx.seed, ctx.next_site++));
  const T keep = static_cast<T>(1.0 / (1.0 - ctx.rate));
  Matrix<T> scale(x.rows(), x.cols());
  T* data = scale.data();
  for (Eigen::Index k = 0; k < scale.size(); ++k) {
    data[k] = stream.uniform() < ctx.rate ? T(0) : keep;
  }
  Matrix<T> y = x.cwiseProduct(scale);
  if (mask) mask->scale = std::move(scale);
  return y;
}

template <typename T>
Matrix<T> dropout_backward(const Matrix<T>& dy, const DropoutMask<T>& mask) {
  if (mask.scale.size() == 0) return dy;
  return dy.cwiseProduct(mask.scale);
}

// ---------------------------------------------------------------------------
// Linear / MLP

template <typename T>
Linear<T>::Linear(ParameterSet<T>& params, const std::string& name, int in,
                  int out, Rng& rng, T weight_scale)
    : in_features(in), out_features(out) {
  weight = params.add(name + ".weight", in, out);
  bias = params.add(name + ".bias", 1, out);
  const double bound = static_cast<double>(weight_scale) / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto& w = params[weight];
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = static_cast<T>(dist(rng));
}

template <typename T>
Matrix<T> Linear<T>::forward(const ParameterSet<T>& params, const Matrix<T>& x,
                             Cache* cache) const {
  Matrix<T> y(x.rows(), out_features);
  y.noalias() = x * params[weight];
  y.rowwise() += params[bias].row(0);
  if (cache) cache->x = x;
  return y;
}

template <typename T>
Matrix<T> Linear<T>::backward(const ParameterSet<T>& params, const Cache& cache,
                              const Matrix<T>& dy, GradientSet<T>& grads) const {
  grads[weight].noalias() += cache.x.transpose() * dy;
  grads[bias] += dy.colwise().sum();
  Matrix<T> dx(dy.rows(), in_features);
  dx.noalias() = dy * params[weight].transpose();
  return dx;
}

template <typename T>
Mlp<T>::Mlp(ParameterSet<T>& params, const std::string& name, int in,
            int hidden, int out, Rng& rng, T output_scale)
    : first(params, name + ".0", in, hidden, rng),
      second(params, name + ".1", hidden, out, rng, output_scale) {}

template <typename T>
Matrix<T> Mlp<T>::forward(const ParameterSet<T>& params, const Matrix<T>& x,
                          Cache* cache) const {
  Matrix<T> h = first.forward(params, x, cache ? &cache->first : nullptr);
  if (cache) cache->pre_activation = h;
  h = h.cwiseMax(T(0));
  return second.forward(params, h, cache ? &cache->second : nullptr);
}

template <typename T>
Matrix<T> Mlp<T>::backward(const ParameterSet<T>& params, const Cache& cache,
                           const Matrix<T>& dy, GradientSet<T>& grads) const {
  Matrix<T> dh = second.backward(params, cache.second, dy, grads);
  dh = (cache.pre_activation.array() > T(0)).select(dh, T(0));
  return first.backward(params, cache.first, dh, grads);
}

// ---------------------------------------------------------------------------
// LayerNorm

template <typename T>
LayerNorm<T>::LayerNorm(ParameterSet<T>& params, const std::string& name,
                        int dim) {
  gain = params.add(name + ".gain", 1, dim);
  shift = params.add(name + ".shift", 1, dim);
  params[gain].setOnes();
}

template <typename T>
Matrix<T> LayerNorm<T>::forward(const ParameterSet<T>& params,
                                const Matrix<T>& x, Cache* cache) const {
  const Eigen::Index d = x.cols();
  Matrix<T> x_hat(x.rows(), d);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).matrix();
    const T var = centered.squaredNorm() / static_cast<T>(d);
    inv_std(r) = T(1) / std::sqrt(var + static_cast<T>(kEpsilon));
    x_hat.row(r) = centered * inv_std(r);
  }
  Matrix<T> y = x_hat.array().rowwise() * params[gain].row(0).array();
  y.rowwise() += params[shift].row(0);
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename T>
Matrix<T> LayerNorm<T>::backward(const ParameterSet<T>& params,
                                 const Cache& cache, const Matrix<T>& dy,
                                 GradientSet<T>& grads) const {
  grads[gain] += (dy.array() * cache.x_hat.array()).colwise().sum().matrix();
  grads[shift] += dy.colwise().sum();
  const Matrix<T> dx_hat = dy.array().rowwise() * params[gain].row(0).array();
  Matrix<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T mean_d = dx_hat.row(r).mean();
    const T mean_dx = dx_hat.row(r).dot(cache.x_hat.row(r)) /
                      static_cast<T>(dy.cols());
    dx.row(r) = cache.inv_std(r) *
                (dx_hat.row(r).array() - mean_d -
                 cache.x_hat.row(r).array() * mean_dx)
                    .matrix();
  }
  return dx;
}

// ---------------------------------------------------------------------------
// AdaIN

template <typename T>
AdaIN<T>::AdaIN(ParameterSet<T>& params, const std::string& name, int dim,
                Rng& rng)
    : gamma_mlp(params, name + ".gamma", dim, dim, dim, rng, T(0.01)),
      beta_mlp(params, name + ".beta", dim, dim, dim, rng, T(0.01)) {
  params[gamma_mlp.second.bias].setOnes();
}

template <typename T>
RowVector<T> AdaIN<T>::gamma(const ParameterSet<T>& params,
                             const RowVector<T>& z) const {
  return gamma_mlp.forward(params, z, nullptr);
}

template <typename T>
RowVector<T> AdaIN<T>::beta(const ParameterSet<T>& params,
                            const RowVector<T>& z) const {
  return beta_mlp.forward(params, z, nullptr);
}

template <typename T>
Matrix<T> AdaIN<T>::forward(const ParameterSet<T>& params, const Matrix<T>& x,
                            int seq_len, const RowVector<T>& z,
                            Cache* cache) const {
  const Eigen::Index d = x.cols();
  const Eigen::Index segments = x.rows() / seq_len;
  RowVector<T> g = gamma_mlp.forward(params, z, cache ? &cache->gamma_cache : nullptr);
  RowVector<T> b = beta_mlp.forward(params, z, cache ? &cache->beta_cache : nullptr);

  Matrix<T> centered(x.rows(), d);
  Matrix<T> x_hat(x.rows(), d);
  Matrix<T> std_dev(segments, d);
  const T eps = static_cast<T>(kEpsilon);
  for (Eigen::Index s = 0; s < segments; ++s) {
    const auto block = x.middleRows(s * seq_len, seq_len);
    const RowVector<T> mu = block.colwise().mean();
    auto c = centered.middleRows(s * seq_len, seq_len);
    c = block.rowwise() - mu;
    const RowVector<T> sd =
        (c.array().square().colwise().sum() / static_cast<T>(seq_len)).sqrt();
    std_dev.row(s) = sd;
    x_hat.middleRows(s * seq_len, seq_len) =
        c.array().rowwise() / (sd.array() + eps);
  }
  Matrix<T> y = x_hat.array().rowwise() * g.array();
  y.rowwise() += b;
  if (cache) {
    cache->gamma = std::move(g);
    cache->beta = std::move(b);
    cache->x_hat = std::move(x_hat);
    cache->centered = std::move(centered);
    cache->std_dev = std::move(std_dev);
  }
  return y;
}

template <typename T>
Matrix<T> AdaIN<T>::backward(const ParameterSet<T>& params, const Cache& cache,
                             const Matrix<T>& dy, int seq_len,
                             GradientSet<T>& grads, RowVector<T>& dz) const {
  const Eigen::Index segments = dy.rows() / seq_len;
  const RowVector<T> d_gamma =
      (dy.array() * cache.x_hat.array()).colwise().sum().matrix();
  const RowVector<T> d_beta = dy.colwise().sum();
  dz += gamma_mlp.backward(params, cache.gamma_cache, d_gamma, grads);
  dz += beta_mlp.backward(params, cache.beta_cache, d_beta, grads);

  const Matrix<T> dx_hat = dy.array().rowwise() * cache.gamma.array();
  Matrix<T> dx(dy.rows(), dy.cols());
  const T eps = static_cast<T>(kEpsilon);
  const T n = static_cast<T>(seq_len);
  for (Eigen::Index s = 0; s < segments; ++s) {
    const auto g = dx_hat.middleRows(s * seq_len, seq_len);
    const auto c = cache.centered.middleRows(s * seq_len, seq_len);
    const RowVector<T> sd = cache.std_dev.row(s);
    const RowVector<T> sigma = sd.array() + eps;
    const RowVector<T> mean_g = g.colwise().mean();
    const RowVector<T> gc = (g.array() * c.array()).colwise().sum().matrix();
    // d sigma / d x_i = (x_i - mu) / (n * sd); zero when sd == 0.
    RowVector<T> coef(sd.size());
    for (Eigen::Index k = 0; k < sd.size(); ++k) {
      coef(k) = sd(k) > T(0) ? gc(k) / (n * sd(k) * sigma(k) * sigma(k)) : T(0);
    }
    auto out = dx.middleRows(s * seq_len, seq_len);
    out = ((g.rowwise() - mean_g).array().rowwise() / sigma.array()).matrix();
    out -= (c.array().rowwise() * coef.array()).matrix();
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Attention

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParameterSet<T>& params,
                                          const std::string& name, int dim_,
                                          int heads_, Rng& rng)
    : qkv(params, name + ".qkv", dim_, 3 * dim_, rng),
      out(params, name + ".out", dim_, dim_, rng),
      dim(dim_),
      heads(heads_) {
  if (heads_ < 1 || dim_ % heads_ != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding width must be divisible by the head count");
  }
}

template <typename T>
Matrix<T> MultiHeadAttention<T>::forward(const ParameterSet<T>& params,
                                         const Matrix<T>& x, int seq_len,
                                         Cache* cache) const {
  const int head_dim = dim / heads;
  const Eigen::Index segments = x.rows() / seq_len;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  Matrix<T> proj = qkv.forward(params, x, cache ? &cache->qkv_cache : nullptr);
  Matrix<T> context(x.rows(), dim);
  if (cache) cache->probs.resize(static_cast<std::size_t>(segments) * heads);
  Matrix<T> p(seq_len, seq_len);
  for (Eigen::Index s = 0; s < segments; ++s) {
    const Eigen::Index r0 = s * seq_len;
    for (int h = 0; h < heads; ++h) {
      const auto q = proj.block(r0, h * head_dim, seq_len, head_dim);
      const auto k = proj.block(r0, dim + h * head_dim, seq_len, head_dim);
      const auto v = proj.block(r0, 2 * dim + h * head_dim, seq_len, head_dim);
      p.noalias() = (q * k.transpose()) * scale;
      const Eigen::Matrix<T, Eigen::Dynamic, 1> row_max = p.rowwise().maxCoeff();
      p.array().colwise() -= row_max.array();
      p.array() = p.array().exp();
      const Eigen::Matrix<T, Eigen::Dynamic, 1> row_inv = p.rowwise().sum().cwiseInverse();
      p.array().colwise() *= row_inv.array();
      context.block(r0, h * head_dim, seq_len, head_dim).noalias() = p * v;
      if (cache) cache->probs[s * heads + h] = p;
    }
  }
  if (cache) cache->qkv = std::move(proj);
  return out.forward(params, context, cache ? &cache->out_cache : nullptr);
}

template <typename T>
Matrix<T> MultiHeadAttention<T>::backward(const ParameterSet<T>& params,
                                          const Cache& cache,
                                          const Matrix<T>& dy, int seq_len,
                                          GradientSet<T>& grads) const {
  const int head_dim = dim / heads;
  const Eigen::Index segments = dy.rows() / seq_len;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  const Matrix<T> d_context = out.backward(params, cache.out_cache, dy, grads);
  Matrix<T> d_proj(dy.rows(), 3 * dim);
  Matrix<T> dp(seq_len, seq_len);
  for (Eigen::Index s = 0; s < segments; ++s) {
    const Eigen::Index r0 = s * seq_len;
    for (int h = 0; h < heads; ++h) {
      const Matrix<T>& p = cache.probs[s * heads + h];
      const auto q = cache.qkv.block(r0, h * head_dim, seq_len, head_dim);
      const auto k = cache.qkv.block(r0, dim + h * head_dim, seq_len, head_dim);
      const auto v = cache.qkv.block(r0, 2 * dim + h * head_dim, seq_len, head_dim);
      const auto dc = d_context.block(r0, h * head_dim, seq_len, head_dim);
      d_proj.block(r0, 2 * dim + h * head_dim, seq_len, head_dim).noalias() =
          p.transpose() * dc;
      dp.noalias() = dc * v.transpose();
      const Eigen::Matrix<T, Eigen::Dynamic, 1> row_dot =
          (dp.array() * p.array()).rowwise().sum();
      dp = (p.array() * (dp.array().colwise() - row_dot.array())) * scale;
      d_proj.block(r0, h * head_dim, seq_len, head_dim).noalias() = dp * k;
      d_proj.block(r0, dim + h * head_dim, seq_len, head_dim).noalias() =
          dp.transpose() * q;
    }
  }
  return qkv.backward(params, cache.qkv_cache, d_proj, grads);
}

// ---------------------------------------------------------------------------
// Transformer block / stack

template <typename T>
TransformerBlock<T>::TransformerBlock(ParameterSet<T>& params,
                                      const std::string& name, int dim,
                                      int heads, int mlp_dim, NormKind norm_,
                                      Rng& rng)
    : norm(norm_) {
  if (norm == NormKind::kLayerNorm) {
    ln1 = LayerNorm<T>(params, name + ".norm1", dim);
  } else {
    ad1 = AdaIN<T>(params, name + ".adain1", dim, rng);
  }
  attn = MultiHeadAttention<T>(params, name + ".attn", dim, heads, rng);
  if (norm == NormKind::kLayerNorm) {
    ln2 = LayerNorm<T>(params, name + ".norm2", dim);
  } else {
    ad2 = AdaIN<T>(params, name + ".adain2", dim, rng);
  }
  ffn = Mlp<T>(params, name + ".ffn", dim, mlp_dim, dim, rng);
}

template <typename T>
Matrix<T> TransformerBlock<T>::forward(const ParameterSet<T>& params,
                                       const Matrix<T>& x, int seq_len,
                                       const RowVector<T>* z,
                                       DropoutContext& drop,
                                       Cache* cache) const {
  const bool adain = norm == NormKind::kAdaIN;
  if (adain && !z) {
    throw Error(ErrorCode::kInvalidArgument, "AdaIN block needs a style vector");
  }
  Matrix<T> n1 = adain ? ad1.forward(params, x, seq_len, *z, cache ? &cache->ad1 : nullptr)
                       : ln1.forward(params, x, cache ? &cache->ln1 : nullptr);
  Matrix<T> a = attn.forward(params, n1, seq_len, cache ? &cache->attn : nullptr);
  Matrix<T> h = x + apply_dropout(a, drop, cache ? &cache->drop1 : nullptr);
  Matrix<T> n2 = adain ? ad2.forward(params, h, seq_len, *z, cache ? &cache->ad2 : nullptr)
                       : ln2.forward(params, h, cache ? &cache->ln2 : nullptr);
  Matrix<T> f = ffn.forward(params, n2, cache ? &cache->ffn : nullptr);
  h += apply_dropout(f, drop, cache ? &cache->drop2 : nullptr);
  return h;
}

template <typename T>
Matrix<T> TransformerBlock<T>::backward(const ParameterSet<T>& params,
                                        const Cache& cache, const Matrix<T>& dy,
                                        int seq_len, GradientSet<T>& grads,
                                        RowVector<T>* dz) const {
  const bool adain = norm == NormKind::kAdaIN;
  Matrix<T> dh = dy;
  {
    const Matrix<T> df = dropout_backward(dy, cache.drop2);
    const Matrix<T> dn2 = ffn.backward(params, cache.ffn, df, grads);
    dh += adain ? ad2.backward(params, cache.ad2, dn2, seq_len, grads, *dz)
                : ln2.backward(params, cache.ln2, dn2, grads);
  }
  Matrix<T> dx = dh;
  {
    const Matrix<T> da = dropout_backward(dh, cache.drop1);
    const Matrix<T> dn1 = attn.backward(params, cache.attn, da, seq_len, grads);
    dx += adain ? ad1.backward(params, cache.ad1, dn1, seq_len, grads, *dz)
                : ln1.backward(params, cache.ln1, dn1, grads);
  }
  return dx;
}

template <typename T>
TransformerStack<T>::TransformerStack(ParameterSet<T>& params,
                                      const std::string& name,
                                      const StackConfig& config_, Rng& rng)
    : config(config_) {
  for (int b = 0; b < config.blocks; ++b) {
    blocks.emplace_back(params, name + ".block" + std::to_string(b), config.dim,
                        config.heads, config.mlp_dim, config.norm, rng);
  }
  final_norm = LayerNorm<T>(params, name + ".final_norm", config.dim);
}

template <typename T>
Matrix<T> TransformerStack<T>::forward(const ParameterSet<T>& params,
                                       Matrix<T> x, int seq_len,
                                       const RowVector<T>* z,
                                       const Matrix<T>* injection,
                                       DropoutContext& drop,
                                       Cache* cache) const {
  if (cache) cache->blocks.resize(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (injection && static_cast<int>(b) == config.inject_at) {
      for (Eigen::Index s = 0; s < injection->rows(); ++s) {
        x.middleRows(s * seq_len, seq_len).rowwise() += injection->row(s);
      }
    }
    x = blocks[b].forward(params, x, seq_len, z, drop,
                          cache ? &cache->blocks[b] : nullptr);
  }
  return final_norm.forward(params, x, cache ? &cache->final_norm : nullptr);
}

template <typename T>
Matrix<T> TransformerStack<T>::backward(const ParameterSet<T>& params,
                                        const Cache& cache, Matrix<T> dy,
                                        int seq_len, GradientSet<T>& grads,
                                        RowVector<T>* dz,
                                        Matrix<T>* d_injection) const {
  dy = final_norm.backward(params, cache.final_norm, dy, grads);
  for (std::size_t b = blocks.size(); b-- > 0;) {
    dy = blocks[b].backward(params, cache.blocks[b], dy, seq_len, grads, dz);
    if (d_injection && static_cast<int>(b) == config.inject_at) {
      for (Eigen::Index s = 0; s < d_injection->rows(); ++s) {
        d_injection->row(s) += dy.middleRows(s * seq_len, seq_len).colwise().sum();
      }
    }
  }
  return dy;
}

template <typename T>
Matrix<T> segment_mean(const Matrix<T>& x, int seq_len) {
  const Eigen::Index segments = x.rows() / seq_len;
  Matrix<T> out(segments, x.cols());
  for (Eigen::Index s = 0; s < segments; ++s) {
    out.row(s) = x.middleRows(s * seq_len, seq_len).colwise().mean();
  }
  return out;
}

template <typename T>
Matrix<T> segment_mean_backward(const Matrix<T>& dy, int seq_len) {
  Matrix<T> dx(dy.rows() * seq_len, dy.cols());
  const T inv = T(1) / static_cast<T>(seq_len);
  for (Eigen::Index s = 0; s < dy.rows(); ++s) {
    dx.middleRows(s * seq_len, seq_len).rowwise() = dy.row(s) * inv;
  }
  return dx;
}

#define VFONT_INSTANTIATE_NN(T)                                               \
  template class ParameterSet<T>;                                             \
  template class GradientSet<T>;                                              \
  template Matrix<T> apply_dropout<T>(const Matrix<T>&, DropoutContext&,      \
                                      DropoutMask<T>*);                       \
  template Matrix<T> dropout_backward<T>(const Matrix<T>&,                    \
                                         const DropoutMask<T>&);              \
  template class Linear<T>;                                                   \
  template class Mlp<T>;                                                      \
  template class LayerNorm<T>;                                                \
  template class AdaIN<T>;                                                    \
  template class MultiHeadAttention<T>;                                       \
  template class TransformerBlock<T>;                                         \
  template class TransformerStack<T>;                                         \
  template Matrix<T> segment_mean<T>(const Matrix<T>&, int);                  \
  template Matrix<T> segment_mean_backward<T>(const Matrix<T>&, int);

VFONT_INSTANTIATE_NN(float)
VFONT_INSTANTIATE_NN(double)

#undef VFONT_INSTANTIATE_NN

}  // namespace vfont::nn
