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

#include "vfont/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vfont {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename Int>
Int parse_value(std::string_view key, std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

}  // namespace

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "n_paths=" << n_paths << "\n"
      << "n_cmds=" << n_cmds << "\n"
      << "dim=" << dim << "\n"
      << "blocks=" << blocks << "\n"
      << "heads=" << heads << "\n"
      << "mlp_dim=" << mlp_dim << "\n"
      << "dropout=" << format_double(dropout) << "\n"
      << "inject_block=" << inject_block << "\n";
  return out.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "bad model config line: " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key == "n_paths") c.n_paths = parse_value<int>(key, value);
    else if (key == "n_cmds") c.n_cmds = parse_value<int>(key, value);
    else if (key == "dim") c.dim = parse_value<int>(key, value);
    else if (key == "blocks") c.blocks = parse_value<int>(key, value);
    else if (key == "heads") c.heads = parse_value<int>(key, value);
    else if (key == "mlp_dim") c.mlp_dim = parse_value<int>(key, value);
    else if (key == "dropout") c.dropout = parse_value<double>(key, value);
    else if (key == "inject_block") c.inject_block = parse_value<int>(key, value);
    else throw Error(ErrorCode::kInvalidArgument, "unknown model config key " + key);
  }
  c.check();
  return c;
}

void ModelConfig::check() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "model config: " + what);
  };
  if (n_paths < 2) fail("n_paths must be >= 2");
  if (n_cmds < 2) fail("n_cmds must be >= 2");
  if (dim < 1 || heads < 1 || dim % heads != 0) fail("dim must be a multiple of heads");
  if (blocks < 1) fail("blocks must be >= 1");
  if (mlp_dim < 1) fail("mlp_dim must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (inject_block < 0 || inject_block >= blocks) fail("inject_block out of range");
}

Prediction Prediction::zeros(int n_paths, int n_cmds) {
  Prediction p;
  p.n_paths = n_paths;
  p.n_cmds = n_cmds;
  const auto cells = static_cast<std::size_t>(n_paths) * n_cmds;
  p.visibility_logits.assign(static_cast<std::size_t>(n_paths) * 2, 0.0);
  p.command_logits.assign(cells * kNumCommandTypes, 0.0);
  p.args.assign(cells * kNumArgs, 0.0);
  p.decoded.assign(n_paths, 0);
  return p;
}

template <typename T>
FontStyleModel<T>::FontStyleModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.check();
  nn::Rng rng(seed);
  const int d = config_.dim;
  enc_embed_ = Embedding<T>(params_, "encoder.embed", d, config_.n_paths,
                            config_.n_cmds, rng);
  dec_embed_ = Embedding<T>(params_, "decoder.embed", d, config_.n_paths,
                            config_.n_cmds, rng);
  nn::StackConfig plain{d, config_.blocks, config_.heads, config_.mlp_dim,
                        nn::NormKind::kLayerNorm, -1};
  nn::StackConfig styled = plain;
  styled.norm = nn::NormKind::kAdaIN;
  e1_ = nn::TransformerStack<T>(params_, "encoder.e1", plain, rng);
  e2_ = nn::TransformerStack<T>(params_, "encoder.e2", plain, rng);
  d2_ = nn::TransformerStack<T>(params_, "decoder.d2", styled, rng);
  styled.inject_at = config_.inject_block;
  d1_ = nn::TransformerStack<T>(params_, "decoder.d1", styled, rng);
  inject_ = nn::Linear<T>(params_, "decoder.inject", d, d, rng);
  visibility_head_ = nn::Mlp<T>(params_, "decoder.visibility_head", d, d, 2, rng);
  command_head_ =
      nn::Mlp<T>(params_, "decoder.command_head", d, d, kNumCommandTypes, rng);
  args_head_ = nn::Mlp<T>(params_, "decoder.args_head", d, d, kNumArgs, rng);
}

namespace {

void check_padded(const PaddedGlyph& g, const ModelConfig& c, const char* what) {
  if (g.n_paths != c.n_paths || g.n_cmds != c.n_cmds) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " glyph is padded to " +
                    std::to_string(g.n_paths) + "x" + std::to_string(g.n_cmds) +
                    ", model expects " + std::to_string(c.n_paths) + "x" +
                    std::to_string(c.n_cmds));
  }
}

template <typename T>
nn::Matrix<T> gather_segments(const nn::Matrix<T>& x, std::span<const int> rows,
                              int seq_len) {
  nn::Matrix<T> out(static_cast<Eigen::Index>(rows.size()) * seq_len, x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.middleRows(static_cast<Eigen::Index>(k) * seq_len, seq_len) =
        x.middleRows(static_cast<Eigen::Index>(rows[k]) * seq_len, seq_len);
  }
  return out;
}

}  // namespace

template <typename T>
StyleFeature<T> FontStyleModel<T>::encode_impl(const PaddedGlyph& style,
                                               nn::DropoutContext& drop,
                                               Trace* trace) const {
  check_padded(style, config_, "style");
  const int n_paths = config_.n_paths;
  const int n_cmds = config_.n_cmds;

  // All-EOS rows are identical inputs; run E1 on one copy.
  std::vector<int> slots;
  std::vector<int> row_slot(n_paths);
  int padding_slot = -1;
  for (int i = 0; i < n_paths; ++i) {
    if (style.row_is_padding(i)) {
      if (padding_slot < 0) {
        padding_slot = static_cast<int>(slots.size());
        slots.push_back(i);
      }
      row_slot[i] = padding_slot;
    } else {
      row_slot[i] = static_cast<int>(slots.size());
      slots.push_back(i);
    }
  }

  nn::Matrix<T> x = enc_embed_.embed_rows(params_, style, slots,
                                          trace ? &trace->enc_embed : nullptr);
  enc_embed_.add_command_index(params_, x);
  const nn::Matrix<T> h = e1_.forward(params_, std::move(x), n_cmds, nullptr,
                                      nullptr, drop, trace ? &trace->e1 : nullptr);
  const nn::Matrix<T> pooled = nn::segment_mean(h, n_cmds);
  nn::Matrix<T> u(n_paths, config_.dim);
  for (int i = 0; i < n_paths; ++i) u.row(i) = pooled.row(row_slot[i]);
  enc_embed_.add_path_index(params_, u);
  const nn::Matrix<T> g = e2_.forward(params_, std::move(u), n_paths, nullptr,
                                      nullptr, drop, trace ? &trace->e2 : nullptr);
  StyleFeature<T> out{g.colwise().mean()};
  if (trace) {
    trace->style_slots = std::move(slots);
    trace->style_row_slot = std::move(row_slot);
    trace->z = out.z;
  }
  return out;
}

template <typename T>
Prediction FontStyleModel<T>::decode_impl(const PaddedGlyph& content,
                                          const StyleFeature<T>& style,
                                          std::span<const int> rows_in,
                                          nn::DropoutContext& drop,
                                          Trace* trace) const {
  check_padded(content, config_, "content");
  const int n_paths = config_.n_paths;
  const int n_cmds = config_.n_cmds;
  std::vector<int> all_rows(n_paths);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<int> rows(rows_in.begin(), rows_in.end());
  if (rows.empty()) rows = all_rows;
  for (int r : rows) {
    if (r < 0 || r >= n_paths) {
      throw Error(ErrorCode::kInvalidArgument, "decode row out of range", r);
    }
  }

  const nn::Matrix<T> e = dec_embed_.embed_rows(
      params_, content, all_rows, trace ? &trace->dec_embed : nullptr);
  nn::Matrix<T> path_in = nn::segment_mean(e, n_cmds);
  dec_embed_.add_path_index(params_, path_in);
  const nn::Matrix<T> w =
      d2_.forward(params_, std::move(path_in), n_paths, &style.z, nullptr, drop,
                  trace ? &trace->d2 : nullptr);
  const nn::Matrix<T> vis = visibility_head_.forward(
      params_, w, trace ? &trace->visibility_head : nullptr);

  nn::Matrix<T> w_sel(static_cast<Eigen::Index>(rows.size()), config_.dim);
  for (std::size_t k = 0; k < rows.size(); ++k) w_sel.row(k) = w.row(rows[k]);
  const nn::Matrix<T> injection =
      inject_.forward(params_, w_sel, trace ? &trace->inject : nullptr);

  nn::Matrix<T> x = gather_segments(e, rows, n_cmds);
  dec_embed_.add_command_index(params_, x);
  const nn::Matrix<T> h =
      d1_.forward(params_, std::move(x), n_cmds, &style.z, &injection, drop,
                  trace ? &trace->d1 : nullptr);
  const nn::Matrix<T> cmd = command_head_.forward(
      params_, h, trace ? &trace->command_head : nullptr);
  const nn::Matrix<T> raw =
      args_head_.forward(params_, h, trace ? &trace->args_head : nullptr);
  const nn::Matrix<T> sig =
      (T(1) / (T(1) + (-raw.array()).exp())).matrix();

  Prediction p = Prediction::zeros(n_paths, n_cmds);
  for (int i = 0; i < n_paths; ++i) {
    p.vis(i, 0) = static_cast<double>(vis(i, 0));
    p.vis(i, 1) = static_cast<double>(vis(i, 1));
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int i = rows[k];
    p.decoded[i] = 1;
    for (int j = 0; j < n_cmds; ++j) {
      const Eigen::Index r = static_cast<Eigen::Index>(k) * n_cmds + j;
      for (int c = 0; c < kNumCommandTypes; ++c) {
        p.cmd(i, j, c) = static_cast<double>(cmd(r, c));
      }
      for (int s = 0; s < kNumArgs; ++s) {
        p.arg(i, j, s) = kCoordMax * static_cast<double>(sig(r, s));
      }
    }
  }
  if (trace) {
    trace->rows = std::move(rows);
    trace->args_sigmoid = sig;
  }
  return p;
}

template <typename T>
StyleFeature<T> FontStyleModel<T>::encode(const PaddedGlyph& style) const {
  nn::DropoutContext drop;
  return encode_impl(style, drop, nullptr);
}

template <typename T>
Prediction FontStyleModel<T>::decode(const PaddedGlyph& content,
                                     const StyleFeature<T>& style,
                                     std::span<const int> rows) const {
  nn::DropoutContext drop;
  return decode_impl(content, style, rows, drop, nullptr);
}

template <typename T>
Glyph FontStyleModel<T>::generate(const PaddedGlyph& content,
                                  const PaddedGlyph& style) const {
  return assemble_glyph(decode(content, encode(style)));
}

template <typename T>
Prediction FontStyleModel<T>::forward(const PaddedGlyph& style,
                                      const PaddedGlyph& content,
                                      std::span<const int> rows,
                                      nn::DropoutContext& dropout,
                                      Trace& trace) const {
  const StyleFeature<T> z = encode_impl(style, dropout, &trace);
  return decode_impl(content, z, rows, dropout, &trace);
}

template <typename T>
void FontStyleModel<T>::backward(const Trace& trace, const Prediction& grad,
                                 nn::GradientSet<T>& grads) const {
  const int n_paths = config_.n_paths;
  const int n_cmds = config_.n_cmds;
  const int d = config_.dim;
  const auto n_rows = static_cast<Eigen::Index>(trace.rows.size());

  nn::Matrix<T> d_vis(n_paths, 2);
  for (int i = 0; i < n_paths; ++i) {
    d_vis(i, 0) = static_cast<T>(grad.vis(i, 0));
    d_vis(i, 1) = static_cast<T>(grad.vis(i, 1));
  }
  nn::Matrix<T> d_cmd(n_rows * n_cmds, kNumCommandTypes);
  nn::Matrix<T> d_raw(n_rows * n_cmds, kNumArgs);
  for (Eigen::Index k = 0; k < n_rows; ++k) {
    const int i = trace.rows[k];
    for (int j = 0; j < n_cmds; ++j) {
      const Eigen::Index r = k * n_cmds + j;
      for (int c = 0; c < kNumCommandTypes; ++c) {
        d_cmd(r, c) = static_cast<T>(grad.cmd(i, j, c));
      }
      for (int s = 0; s < kNumArgs; ++s) {
        const T sg = trace.args_sigmoid(r, s);
        d_raw(r, s) = static_cast<T>(grad.arg(i, j, s)) *
                      static_cast<T>(kCoordMax) * sg * (T(1) - sg);
      }
    }
  }

  // Decoder, D1 path.
  nn::Matrix<T> dh = command_head_.backward(params_, trace.command_head, d_cmd, grads);
  dh += args_head_.backward(params_, trace.args_head, d_raw, grads);
  nn::RowVector<T> dz = nn::RowVector<T>::Zero(d);
  nn::Matrix<T> d_injection = nn::Matrix<T>::Zero(n_rows, d);
  const nn::Matrix<T> dx1 = d1_.backward(params_, trace.d1, std::move(dh), n_cmds,
                                         grads, &dz, &d_injection);
  dec_embed_.add_command_index_backward(dx1, grads);
  nn::Matrix<T> de = nn::Matrix<T>::Zero(static_cast<Eigen::Index>(n_paths) * n_cmds, d);
  for (Eigen::Index k = 0; k < n_rows; ++k) {
    de.middleRows(static_cast<Eigen::Index>(trace.rows[k]) * n_cmds, n_cmds) +=
        dx1.middleRows(k * n_cmds, n_cmds);
  }

  // Decoder, D2 path.
  const nn::Matrix<T> dw_sel = inject_.backward(params_, trace.inject, d_injection, grads);
  nn::Matrix<T> dw = visibility_head_.backward(params_, trace.visibility_head, d_vis, grads);
  for (Eigen::Index k = 0; k < n_rows; ++k) dw.row(trace.rows[k]) += dw_sel.row(k);
  const nn::Matrix<T> d_path_in =
      d2_.backward(params_, trace.d2, std::move(dw), n_paths, grads, &dz, nullptr);
  dec_embed_.add_path_index_backward(d_path_in, grads);
  de += nn::segment_mean_backward(d_path_in, n_cmds);
  dec_embed_.embed_rows_backward(params_, trace.dec_embed, de, grads);

  // Encoder.
  const nn::Matrix<T> dg = nn::segment_mean_backward(nn::Matrix<T>(dz), n_paths);
  const nn::Matrix<T> du =
      e2_.backward(params_, trace.e2, dg, n_paths, grads, nullptr, nullptr);
  enc_embed_.add_path_index_backward(du, grads);
  nn::Matrix<T> d_pooled =
      nn::Matrix<T>::Zero(static_cast<Eigen::Index>(trace.style_slots.size()), d);
  for (int i = 0; i < n_paths; ++i) d_pooled.row(trace.style_row_slot[i]) += du.row(i);
  const nn::Matrix<T> dx = e1_.backward(params_, trace.e1,
                                        nn::segment_mean_backward(d_pooled, n_cmds),
                                        n_cmds, grads, nullptr, nullptr);
  enc_embed_.add_command_index_backward(dx, grads);
  enc_embed_.embed_rows_backward(params_, trace.enc_embed, dx, grads);
}

template class FontStyleModel<float>;
template class FontStyleModel<double>;

Glyph assemble_glyph(const Prediction& prediction) {
  Glyph glyph;
  for (int i = 0; i < prediction.n_paths; ++i) {
    if (!prediction.decoded[i]) continue;
    if (!(prediction.vis(i, 1) > prediction.vis(i, 0))) continue;
    Path path;
    for (int j = 0; j < prediction.n_cmds; ++j) {
      if (static_cast<int>(path.commands.size()) >= prediction.n_cmds - 1) break;
      int best = 0;
      for (int c = 1; c < kNumCommandTypes; ++c) {
        if (prediction.cmd(i, j, c) > prediction.cmd(i, j, best)) best = c;
      }
      const auto kind = static_cast<CommandType>(best);
      if (kind == CommandType::kEOS) break;
      if (kind == CommandType::kSOS) continue;
      if (path.commands.empty() && kind != CommandType::kM) continue;
      Command cmd;
      cmd.kind = kind;
      for (int s = 0; s < kNumArgs; ++s) {
        cmd.args[s] = uses_slot(kind, s)
                          ? std::clamp(prediction.arg(i, j, s), 0.0, kCoordMax)
                          : kUnusedArg;
      }
      path.commands.push_back(cmd);
    }
    if (!path.commands.empty()) glyph.paths.push_back(std::move(path));
  }
  return glyph;
}

}  // namespace vfont
