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

// Training losses against a canonically ordered, padded target. Row i of the
// prediction is paired with row i of the target.
//
// Every loss takes an optional `grad` prediction-shaped buffer; when given,
// `scale * dLoss/dPrediction` is accumulated into it.

#include "vfont/model.hpp"
#include "vfont/svg.hpp"

namespace vfont {

inline constexpr int kTrainSamplesPerCommand = 9;
inline constexpr int kEvalSamplesPerCommand = 99;

struct LossWeights {
  double visibility = 1.0;
  double command = 1.0;
  double args = 1.0;
  double chamfer = 1.0;
};

struct LossBreakdown {
  double visibility = 0.0;
  double command = 0.0;
  double args = 0.0;
  // Chamfer term divided by 255^2 so it is on the scale of the others.
  double chamfer = 0.0;
  double total = 0.0;
  bool args_all_masked = false;
};

// Mean cross-entropy of visibility logits over all path slots.
double visibility_loss(const Prediction& pred, const PaddedGlyph& target,
                       Prediction* grad = nullptr, double scale = 1.0);

// Mean 6-way cross-entropy over every command slot of target-visible paths.
double command_loss(const Prediction& pred, const PaddedGlyph& target,
                    Prediction* grad = nullptr, double scale = 1.0);

struct ArgumentLoss {
  double value = 0.0;
  bool all_masked = false;
};

// Mean |pred - target| over argument slots with arg_mask == 1.
ArgumentLoss argument_loss(const Prediction& pred, const PaddedGlyph& target,
                           Prediction* grad = nullptr, double scale = 1.0);

// Mean over target-visible paths of d_CD(target cloud, predicted cloud), in
// squared coordinate units. Predicted clouds use the target command types
// with the predicted coordinates, the pen threaded through predicted points.
double chamfer_loss(const Prediction& pred, const PaddedGlyph& target, int n_p,
                    Prediction* grad = nullptr, double scale = 1.0);

LossBreakdown total_loss(const Prediction& pred, const PaddedGlyph& target,
                         const LossWeights& weights, int n_p,
                         Prediction* grad = nullptr);

}  // namespace vfont
