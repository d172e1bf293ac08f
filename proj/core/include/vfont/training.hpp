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

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vfont/dataset.hpp"
#include "vfont/losses.hpp"
#include "vfont/model.hpp"
#include "vfont/optimizer.hpp"

namespace vfont {

struct TrainConfig {
  int batch_size = 96;
  int epochs = 1500;
  int warmup_iters = 500;
  double peak_lr = 0.002;
  double decay_rate = 0.9999;
  int n_p_train = kTrainSamplesPerCommand;
  std::uint64_t seed = 0;
  int n_paths = 12;
  int n_cmds = 100;

  // Network size.
  int dim = 256;
  int blocks = 6;
  int heads = 8;
  int mlp_dim = 512;
  double dropout = 0.1;
  int inject_block = 3;

  // Run control. max_steps > 0 caps the run below epochs * steps_per_epoch.
  std::int64_t max_steps = 0;
  int checkpoint_every = 100;  // epochs
  double clip_norm = 1.0;
  double w_visibility = 1.0;
  double w_command = 1.0;
  double w_args = 1.0;
  double w_chamfer = 1.0;

  ModelConfig model_config() const;
  LossWeights loss_weights() const;

  // Sets one field from its textual value; unknown keys are rejected.
  void set(std::string_view key, std::string_view value);
  // Applies "key=value" lines ('#' starts a comment) on top of this config.
  void apply_text(std::string_view text);
  std::string to_text() const;
  void check() const;

  bool operator==(const TrainConfig&) const = default;
};

TrainConfig read_train_config(const std::filesystem::path& path);

double lr_schedule(std::int64_t step, const TrainConfig& cfg);

struct BatchItem {
  TrainingPair pair;
  // Content whose glyph in pair.style serves as the style reference.
  std::string style_content;
};

std::int64_t steps_per_epoch(const TrainConfig& cfg, const DatasetSplit& data);
std::int64_t total_steps(const TrainConfig& cfg, const DatasetSplit& data);
// Items of the batch consumed at `step`; a pure function of (cfg.seed, step).
std::vector<BatchItem> batch_at(const TrainConfig& cfg, const DatasetSplit& data,
                                std::int64_t step);

struct StepMetrics {
  std::int64_t step = 0;
  double lr = 0.0;
  LossBreakdown loss;
};

std::string metrics_csv_header();
std::string format_metrics_row(const StepMetrics& m);

struct TrainState {
  FontStyleModel<float> model;
  Adam<float> optimizer;
  std::int64_t step = 0;

  static TrainState fresh(const TrainConfig& cfg);
};

struct TrainHooks {
  std::function<void(const StepMetrics&)> on_step;
  // Called after the last step of every cfg.checkpoint_every-th epoch.
  std::function<void(const TrainState&)> on_checkpoint;
  // Stop once state.step reaches this value (negative: run to the end).
  std::int64_t stop_at = -1;
  int threads = 1;
};

// Runs from state.step to the end of the schedule. Throws NonFiniteLoss
// carrying the step index.
std::vector<StepMetrics> train(const TrainConfig& cfg, const DatasetSplit& data,
                               TrainState& state, const TrainHooks& hooks = {});

}  // namespace vfont
