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

#include "vfont/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "vfont/checkpoint.hpp"
#include "vfont/dataset.hpp"
#include "vfont/synth.hpp"

namespace vfont {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vfont_training_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainConfig tiny_train_config() {
  TrainConfig c;
  c.batch_size = 4;
  c.epochs = 3;
  c.warmup_iters = 2;
  c.dim = 8;
  c.blocks = 2;
  c.heads = 2;
  c.mlp_dim = 12;
  c.inject_block = 1;
  c.seed = 3;
  return c;
}

const DatasetSplit& tiny_data() {
  static const DatasetSplit data = synth_dataset(11, 3, 4);
  return data;
}

TEST(LrSchedule, WarmupThenDecay) {
  const TrainConfig c;
  EXPECT_EQ(lr_schedule(0, c), 0.0);
  EXPECT_DOUBLE_EQ(lr_schedule(250, c), 0.001);
  EXPECT_EQ(lr_schedule(500, c), 0.002);
  EXPECT_DOUBLE_EQ(lr_schedule(501, c), 0.002 * 0.9999);
  EXPECT_DOUBLE_EQ(lr_schedule(1500, c), 0.002 * std::pow(0.9999, 1000));
  EXPECT_LT(std::abs(lr_schedule(501, c) - lr_schedule(500, c)), 1e-6);
  EXPECT_LT(std::abs(lr_schedule(499, c) - lr_schedule(500, c)), 1e-5);
  for (std::int64_t s = 1; s < 500; ++s) EXPECT_GT(lr_schedule(s, c), lr_schedule(s - 1, c));
  for (std::int64_t s = 501; s < 700; ++s) EXPECT_LT(lr_schedule(s, c), lr_schedule(s - 1, c));
}

TEST(TrainConfig, DefaultsParsingAndErrors) {
  const TrainConfig d;
  EXPECT_EQ(d.batch_size, 96);
  EXPECT_EQ(d.epochs, 1500);
  EXPECT_EQ(d.warmup_iters, 500);
  EXPECT_EQ(d.peak_lr, 0.002);
  EXPECT_EQ(d.decay_rate, 0.9999);
  EXPECT_EQ(d.n_p_train, 9);

  TrainConfig c;
  c.apply_text("# comment\nbatch_size = 8\n\ndropout=0.25  # trailing\n");
  EXPECT_EQ(c.batch_size, 8);
  EXPECT_EQ(c.dropout, 0.25);
  TrainConfig round;
  round.apply_text(c.to_text());
  EXPECT_EQ(round, c);
  EXPECT_THROW(c.set("nope", "1"), Error);
  EXPECT_THROW(c.set("batch_size", "eight"), Error);
  c.batch_size = 0;
  EXPECT_THROW(c.check(), Error);
}

TEST(Synth, DeterministicValidAndIdentified) {
  const DatasetSplit a = synth_dataset(5, 3, 6);
  const DatasetSplit b = synth_dataset(5, 3, 6);
  const DatasetSplit other = synth_dataset(6, 3, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.glyphs, other.glyphs);
  EXPECT_EQ(a.content_style, "style00");
  EXPECT_EQ(a.styles, (std::vector<std::string>{"style01", "style02"}));
  EXPECT_EQ(a.contents.size(), 6u);
  EXPECT_EQ(a.contents.front(), "c000");
  EXPECT_EQ(a.pairs.size(), 12u);
  EXPECT_EQ(a.glyphs.size(), 18u);
  for (const auto& [key, glyph] : a.glyphs) {
    EXPECT_NO_THROW(validate(glyph)) << key.first << "/" << key.second;
    EXPECT_NO_THROW(pad_to_fixed(glyph, 12, 100));
    EXPECT_EQ(glyph, canonical_path_order(glyph));
  }
  // Same character, different styles: same path count, different outline.
  EXPECT_EQ(a.glyph("style01", "c002").paths.size(), a.glyph("style02", "c002").paths.size());
  EXPECT_NE(a.glyph("style01", "c002"), a.glyph("style02", "c002"));
  EXPECT_THROW(synth_dataset(1, 1, 4), Error);
  EXPECT_THROW(synth_dataset(1, 3, 1), Error);
}

TEST(Synth, IdentityStyle) {
  const StyleParams s = random_style(9, 0);
  EXPECT_EQ(s.half_thickness, StyleParams::identity().half_thickness);
  EXPECT_EQ(s.slant, 0.0);
  EXPECT_EQ(s.scale, 1.0);
  EXPECT_EQ(s.corner_radius, 0.0);
  const Glyph bar = render_strokes({Stroke{StrokeKind::kHorizontalBar, 50, 100, 150, 100}}, s);
  ASSERT_EQ(bar.paths.size(), 1u);
  double min_y = 1e9, max_y = -1e9;
  for (const Command& c : bar.paths[0].commands) {
    if (c.kind == CommandType::kZ) continue;
    min_y = std::min(min_y, c.y());
    max_y = std::max(max_y, c.y());
  }
  EXPECT_DOUBLE_EQ(max_y - min_y, 2 * s.half_thickness);
}

TEST(Dataset, SplitRulesAndRoundTrip) {
  const DatasetSplit two = synth_dataset(2, 2, 3);
  const Dataset d2 = make_dataset(two);
  EXPECT_EQ(d2.train_styles, d2.eval_styles);

  const DatasetSplit many = synth_dataset(2, 11, 3);
  const Dataset d = make_dataset(many);
  EXPECT_EQ(d.eval_styles, (std::vector<std::string>{"style10"}));
  EXPECT_EQ(d.train_styles.size(), 9u);
  EXPECT_EQ(d.train().pairs.size(), 27u);
  EXPECT_EQ(d.eval().pairs.size(), 3u);

  const fs::path dir = temp_dir("dataset");
  const Dataset small = make_dataset(synth_dataset(4, 4, 3));
  write_dataset(dir, small);
  const Dataset back = read_dataset(dir);
  EXPECT_EQ(back.all, small.all);
  EXPECT_EQ(back.train_styles, small.train_styles);
  EXPECT_EQ(back.eval_styles, small.eval_styles);
  EXPECT_THROW(small.all.glyph("style99", "c000"), Error);
  fs::remove_all(dir);
}

TEST(Batches, CoverEpochAndAvoidTargetAsStyleReference) {
  const TrainConfig c = tiny_train_config();
  const DatasetSplit& data = tiny_data();
  EXPECT_EQ(steps_per_epoch(c, data), 2);
  EXPECT_EQ(total_steps(c, data), 6);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::multiset<std::pair<std::string, std::string>> seen;
    for (int s = 0; s < 2; ++s) {
      const auto batch = batch_at(c, data, epoch * 2 + s);
      EXPECT_EQ(batch.size(), 4u);
      for (const BatchItem& item : batch) {
        seen.insert({item.pair.style, item.pair.content});
        EXPECT_NE(item.style_content, item.pair.content);
        EXPECT_NO_THROW(data.glyph(item.pair.style, item.style_content));
      }
    }
    EXPECT_EQ(seen.size(), 8u);
    EXPECT_EQ(std::set(seen.begin(), seen.end()).size(), 8u);
  }
  const auto a = batch_at(c, data, 4), b = batch_at(c, data, 4);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].pair, b[k].pair);
    EXPECT_EQ(a[k].style_content, b[k].style_content);
  }
  TrainConfig capped = c;
  capped.max_steps = 4;
  EXPECT_EQ(total_steps(capped, data), 4);
}

TEST(Metrics, CsvFormat) {
  EXPECT_EQ(metrics_csv_header(), "step,lr,loss_vis,loss_cmd,loss_args,loss_cfr,loss_total");
  StepMetrics m;
  m.step = 3;
  m.lr = 0.5;
  m.loss.visibility = 0.1;
  m.loss.command = 0.25;
  m.loss.args = 2;
  m.loss.chamfer = 1e-7;
  m.loss.total = 2.35;
  EXPECT_EQ(format_metrics_row(m), "3,0.5,0.1,0.25,2,1e-07,2.35");
}

std::vector<std::string> rows_of(const std::vector<StepMetrics>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(format_metrics_row(m));
  return out;
}

TEST(Training, FirstBatchLossIsFiniteAndDecreases) {
  TrainConfig c = tiny_train_config();
  c.epochs = 10;
  c.warmup_iters = 1;
  c.peak_lr = 0.01;
  TrainState state = TrainState::fresh(c);
  const auto ms = train(c, tiny_data(), state);
  ASSERT_EQ(ms.size(), 20u);
  EXPECT_TRUE(std::isfinite(ms[0].loss.total));
  EXPECT_EQ(ms[0].lr, 0.0);
  EXPECT_GT(ms[0].loss.total, 0.0);
  EXPECT_LT(ms.back().loss.total, ms[0].loss.total);
  EXPECT_EQ(state.step, 20);
  EXPECT_EQ(state.optimizer.steps_taken(), 20);
}

TEST(Training, DeterministicAcrossRunsAndThreads) {
  const TrainConfig c = tiny_train_config();
  TrainState a = TrainState::fresh(c), b = TrainState::fresh(c), t = TrainState::fresh(c);
  const auto ma = rows_of(train(c, tiny_data(), a));
  const auto mb = rows_of(train(c, tiny_data(), b));
  TrainHooks threaded;
  threaded.threads = 3;
  const auto mt = rows_of(train(c, tiny_data(), t, threaded));
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(ma, mt);
  EXPECT_EQ(encode_checkpoint(make_checkpoint(a.model, &a.optimizer, a.step)),
            encode_checkpoint(make_checkpoint(t.model, &t.optimizer, t.step)));
}

TEST(Training, ResumeMatchesUninterruptedRun) {
  TrainConfig c = tiny_train_config();
  c.dropout = 0.2;
  TrainState full = TrainState::fresh(c);
  const auto straight = rows_of(train(c, tiny_data(), full));

  TrainState first = TrainState::fresh(c);
  TrainHooks stop;
  stop.stop_at = 3;
  auto part = rows_of(train(c, tiny_data(), first, stop));
  ASSERT_EQ(part.size(), 3u);
  const std::string bytes = encode_checkpoint(make_checkpoint(first.model, &first.optimizer, first.step));
  TrainState resumed = TrainState::fresh(c);
  restore_checkpoint(decode_checkpoint(bytes), resumed.model, &resumed.optimizer);
  resumed.step = decode_checkpoint(bytes).step;
  const auto rest = rows_of(train(c, tiny_data(), resumed));
  part.insert(part.end(), rest.begin(), rest.end());
  EXPECT_EQ(part, straight);
}

TEST(Training, CheckpointHookCadence) {
  TrainConfig c = tiny_train_config();
  c.checkpoint_every = 2;
  TrainState state = TrainState::fresh(c);
  std::vector<std::int64_t> at;
  TrainHooks hooks;
  hooks.on_checkpoint = [&](const TrainState& s) { at.push_back(s.step); };
  train(c, tiny_data(), state, hooks);
  EXPECT_EQ(at, (std::vector<std::int64_t>{4}));
}

class CheckpointTest : public ::testing::Test {
 protected:
  CheckpointTest() : state_(TrainState::fresh(tiny_train_config())) {
    train(tiny_train_config(), tiny_data(), state_, TrainHooks{{}, {}, 2, 1});
  }

  static ErrorCode code_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::kInvalidArgument;
  }

  TrainState state_;
};

TEST_F(CheckpointTest, RoundTripIsExact) {
  const Checkpoint c = make_checkpoint(state_.model, &state_.optimizer, state_.step);
  EXPECT_TRUE(c.has_optimizer);
  EXPECT_EQ(c.step, 2);
  EXPECT_EQ(decode_checkpoint(encode_checkpoint(c)), c);

  const fs::path dir = temp_dir("ckpt");
  save_checkpoint(dir / "a.vfck", state_.model, &state_.optimizer, state_.step);
  const LoadedModel loaded = load_checkpoint(dir / "a.vfck");
  EXPECT_EQ(loaded.step, 2);
  ASSERT_TRUE(loaded.optimizer.has_value());
  EXPECT_EQ(loaded.optimizer->steps_taken(), 2);
  EXPECT_EQ(loaded.model.config(), state_.model.config());
  for (int i = 0; i < state_.model.params().size(); ++i) {
    EXPECT_EQ(loaded.model.params()[i], state_.model.params()[i]);
  }
  fs::remove_all(dir);
}

TEST_F(CheckpointTest, CorruptionAndVersionErrors) {
  const Checkpoint c = make_checkpoint(state_.model, &state_.optimizer, state_.step);
  const std::string bytes = encode_checkpoint(c);
  EXPECT_EQ(code_of([&] { decode_checkpoint(bytes.substr(0, bytes.size() / 2)); }),
            ErrorCode::kCorruptFile);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  EXPECT_EQ(code_of([&] { decode_checkpoint(flipped); }), ErrorCode::kCorruptFile);
  EXPECT_EQ(code_of([&] { decode_checkpoint("nope"); }), ErrorCode::kCorruptFile);
  EXPECT_EQ(code_of([&] { decode_checkpoint(encode_checkpoint(c, kCheckpointVersion + 1)); }),
            ErrorCode::kVersionMismatch);
  EXPECT_EQ(code_of([] { read_checkpoint("/nonexistent/x.vfck"); }), ErrorCode::kIo);
}

TEST_F(CheckpointTest, ShapeMismatchOnDifferentConfig) {
  const Checkpoint c = make_checkpoint(state_.model, nullptr, 0);
  EXPECT_FALSE(c.has_optimizer);
  ModelConfig other = state_.model.config();
  other.n_paths = 10;
  FontStyleModel<float> model(other, 1);
  EXPECT_EQ(code_of([&] { restore_checkpoint(c, model); }), ErrorCode::kShapeMismatch);
  Checkpoint tampered = c;
  tampered.tensors[0].rows += 1;
  FontStyleModel<float> same(state_.model.config(), 1);
  EXPECT_EQ(code_of([&] { restore_checkpoint(tampered, same); }), ErrorCode::kShapeMismatch);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  nn::ParameterSet<float> params;
  params.add("w", 1, 3);
  params[0] << 1.0f, 2.0f, 3.0f;
  nn::GradientSet<float> g(params);
  g[0] << 0.5f, -2.0f, 0.0f;
  Adam<float> opt(params);
  opt.step(params, g, 0.1);
  EXPECT_NEAR(params[0](0, 0), 0.9f, 1e-6);
  EXPECT_NEAR(params[0](0, 1), 2.1f, 1e-6);
  EXPECT_NEAR(params[0](0, 2), 3.0f, 1e-6);
  EXPECT_EQ(opt.steps_taken(), 1);
}

}  // namespace
}  // namespace vfont
