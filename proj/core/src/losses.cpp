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

#include "vfont/losses.hpp"

#include <array>
#include <cmath>

#include "vfont/geometry.hpp"

namespace vfont {

namespace {

void check_shapes(const Prediction& pred, const PaddedGlyph& target) {
  if (pred.n_paths != target.n_paths || pred.n_cmds != target.n_cmds) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and target shapes differ");
  }
  for (int i = 0; i < target.n_paths; ++i) {
    if (target.visible(i) && !pred.decoded[i]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "target-visible row was not decoded", i);
    }
  }
}

// Cross-entropy of one logit row; adds scale * (softmax - onehot) to grad.
template <std::size_t N>
double cross_entropy(const double* logits, int label, double* grad, double scale) {
  double max_logit = logits[0];
  for (std::size_t c = 1; c < N; ++c) max_logit = std::max(max_logit, logits[c]);
  std::array<double, N> e{};
  double sum = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    e[c] = std::exp(logits[c] - max_logit);
    sum += e[c];
  }
  const double loss = std::log(sum) + max_logit - logits[label];
  if (grad) {
    for (std::size_t c = 0; c < N; ++c) {
      grad[c] += scale * (e[c] / sum - (static_cast<int>(c) == label ? 1.0 : 0.0));
    }
  }
  return loss;
}

}  // namespace

double visibility_loss(const Prediction& pred, const PaddedGlyph& target,
                       Prediction* grad, double scale) {
  check_shapes(pred, target);
  const double inv = 1.0 / target.n_paths;
  double sum = 0.0;
  for (int i = 0; i < target.n_paths; ++i) {
    sum += cross_entropy<2>(&pred.visibility_logits[i * 2], target.visible(i) ? 1 : 0,
                            grad ? &grad->visibility_logits[i * 2] : nullptr,
                            scale * inv);
  }
  return sum * inv;
}

double command_loss(const Prediction& pred, const PaddedGlyph& target,
                    Prediction* grad, double scale) {
  check_shapes(pred, target);
  int visible = 0;
  for (int i = 0; i < target.n_paths; ++i) visible += target.visible(i) ? 1 : 0;
  if (visible == 0) return 0.0;
  const double inv = 1.0 / (static_cast<double>(visible) * target.n_cmds);
  double sum = 0.0;
  for (int i = 0; i < target.n_paths; ++i) {
    if (!target.visible(i)) continue;
    for (int j = 0; j < target.n_cmds; ++j) {
      const std::size_t off =
          (static_cast<std::size_t>(i) * target.n_cmds + j) * kNumCommandTypes;
      sum += cross_entropy<kNumCommandTypes>(
          &pred.command_logits[off], static_cast<int>(target.type(i, j)),
          grad ? &grad->command_logits[off] : nullptr, scale * inv);
    }
  }
  return sum * inv;
}

ArgumentLoss argument_loss(const Prediction& pred, const PaddedGlyph& target,
                           Prediction* grad, double scale) {
  check_shapes(pred, target);
  std::size_t count = 0;
  for (auto m : target.arg_mask) count += m;
  if (count == 0) return {0.0, true};
  const double inv = 1.0 / static_cast<double>(count);
  double sum = 0.0;
  for (std::size_t k = 0; k < target.args.size(); ++k) {
    if (!target.arg_mask[k]) continue;
    const double diff = pred.args[k] - target.args[k];
    sum += std::abs(diff);
    if (grad && diff != 0.0) grad->args[k] += scale * inv * (diff > 0.0 ? 1.0 : -1.0);
  }
  return {sum * inv, false};
}

namespace {

// A sampled predicted point as a weighted sum of argument-slot pairs.
struct SampleTerm {
  int cmd = -1;   // command index in the row
  int slot = 0;   // x slot; y is slot + 1
  double weight = 0.0;
};

struct PredictedSample {
  Point point;
  std::array<SampleTerm, 4> terms;
  int n_terms = 0;
};

struct PointRef {
  int cmd = -1;
  int slot = kSlotX;
};

Point target_point(const PaddedGlyph& t, int row, PointRef ref) {
  return {t.arg(row, ref.cmd, ref.slot), t.arg(row, ref.cmd, ref.slot + 1)};
}

Point pred_point(const Prediction& p, int row, PointRef ref) {
  return {p.arg(row, ref.cmd, ref.slot), p.arg(row, ref.cmd, ref.slot + 1)};
}

// Walks the target command types of one row, sampling both the target and
// predicted curves.
void sample_row(const Prediction& pred, const PaddedGlyph& target, int row,
                int n_p, PointCloud& target_cloud,
                std::vector<PredictedSample>& pred_samples) {
  PointRef pen;
  PointRef start;
  bool has_pen = false;
  for (int j = 0; j < target.n_cmds; ++j) {
    const CommandType kind = target.type(row, j);
    if (kind == CommandType::kEOS) break;
    if (kind == CommandType::kM) {
      pen = start = PointRef{j, kSlotX};
      has_pen = true;
      continue;
    }
    if (kind == CommandType::kZ) {
      pen = start;
      continue;
    }
    if (!is_drawing(kind)) continue;
    if (!has_pen) {
      throw Error(ErrorCode::kInvalidPenSequence, "drawing command before any M", row);
    }
    Command t_cmd;
    t_cmd.kind = kind;
    Command p_cmd;
    p_cmd.kind = kind;
    for (int s = 0; s < kNumArgs; ++s) {
      t_cmd.args[s] = target.arg(row, j, s);
      p_cmd.args[s] = pred.arg(row, j, s);
    }
    const Point t_start = target_point(target, row, pen);
    const Point p_start = pred_point(pred, row, pen);
    for (int k = 0; k < n_p; ++k) {
      const double t = static_cast<double>(k) / n_p;
      target_cloud.push_back(eval_curve(t_cmd, t_start, t));
      PredictedSample s;
      s.point = eval_curve(p_cmd, p_start, t);
      if (kind == CommandType::kL) {
        s.terms[0] = {pen.cmd, pen.slot, 1.0 - t};
        s.terms[1] = {j, kSlotX, t};
        s.n_terms = 2;
      } else {
        const double u = 1.0 - t;
        s.terms[0] = {pen.cmd, pen.slot, u * u * u};
        s.terms[1] = {j, kSlotX1, 3.0 * u * u * t};
        s.terms[2] = {j, kSlotX2, 3.0 * u * t * t};
        s.terms[3] = {j, kSlotX, t * t * t};
        s.n_terms = 4;
      }
      pred_samples.push_back(s);
    }
    pen = PointRef{j, kSlotX};
  }
}

}  // namespace

double chamfer_loss(const Prediction& pred, const PaddedGlyph& target, int n_p,
                    Prediction* grad, double scale) {
  check_shapes(pred, target);
  if (n_p < 1) throw Error(ErrorCode::kInvalidArgument, "n_p must be >= 1");
  int visible = 0;
  for (int i = 0; i < target.n_paths; ++i) visible += target.visible(i) ? 1 : 0;
  if (visible == 0) return 0.0;
  const double inv_paths = 1.0 / visible;

  double sum = 0.0;
  PointCloud target_cloud;
  std::vector<PredictedSample> samples;
  PointCloud pred_cloud;
  for (int i = 0; i < target.n_paths; ++i) {
    if (!target.visible(i)) continue;
    target_cloud.clear();
    samples.clear();
    sample_row(pred, target, i, n_p, target_cloud, samples);
    if (samples.empty()) continue;
    pred_cloud.resize(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) pred_cloud[k] = samples[k].point;

    const ChamferMatch m = chamfer_match(target_cloud, pred_cloud);
    sum += m.distance;
    if (!grad) continue;

    // d/dp of (1/|T|) sum_t min_p |t - p|^2 + (1/|P|) sum_p min_t |t - p|^2.
    std::vector<Point> point_grad(samples.size(), Point{});
    const double inv_t = 1.0 / static_cast<double>(target_cloud.size());
    const double inv_p = 1.0 / static_cast<double>(pred_cloud.size());
    for (std::size_t t = 0; t < target_cloud.size(); ++t) {
      const int k = m.a_to_b[t];
      point_grad[k] = point_grad[k] + (2.0 * inv_t) * (pred_cloud[k] - target_cloud[t]);
    }
    for (std::size_t k = 0; k < pred_cloud.size(); ++k) {
      const int t = m.b_to_a[k];
      point_grad[k] = point_grad[k] + (2.0 * inv_p) * (pred_cloud[k] - target_cloud[t]);
    }
    const double s = scale * inv_paths;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      for (int n = 0; n < samples[k].n_terms; ++n) {
        const SampleTerm& term = samples[k].terms[n];
        grad->arg(i, term.cmd, term.slot) += s * term.weight * point_grad[k].x;
        grad->arg(i, term.cmd, term.slot + 1) += s * term.weight * point_grad[k].y;
      }
    }
  }
  return sum * inv_paths;
}

LossBreakdown total_loss(const Prediction& pred, const PaddedGlyph& target,
                         const LossWeights& weights, int n_p, Prediction* grad) {
  constexpr double kChamferScale = 1.0 / (kCoordMax * kCoordMax);
  LossBreakdown b;
  b.visibility = visibility_loss(pred, target, grad, weights.visibility);
  b.command = command_loss(pred, target, grad, weights.command);
  const ArgumentLoss a = argument_loss(pred, target, grad, weights.args);
  b.args = a.value;
  b.args_all_masked = a.all_masked;
  b.chamfer = kChamferScale *
              chamfer_loss(pred, target, n_p, grad, weights.chamfer * kChamferScale);
  b.total = weights.visibility * b.visibility + weights.command * b.command +
            weights.args * b.args + weights.chamfer * b.chamfer;
  return b;
}

}  // namespace vfont
