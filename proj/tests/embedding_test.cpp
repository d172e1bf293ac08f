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

#include <gtest/gtest.h>

#include "support/gradcheck.hpp"

namespace vfont {
namespace {

using testing::check_matrix_gradient;
using testing::MatD;
using testing::probe;
using testing::random_matrix;

constexpr int kDim = 8;
constexpr int kPaths = 3;
constexpr int kCmds = 6;

Glyph two_path_glyph() {
  Glyph g;
  g.paths.push_back({{Command::move_to(10, 20), Command::line_to(30, 40),
                      Command::cubic_to(1, 2, 3, 4, 5, 6), Command::close()},
                     true});
  g.paths.push_back({{Command::move_to(100, 200), Command::line_to(120, 220)}, true});
  return g;
}

struct Fixture {
  std::mt19937_64 rng{21};
  nn::ParameterSet<double> params;
  Embedding<double> emb{params, "emb", kDim, kPaths, kCmds, rng};
};

TEST(Embedding, CoordinateFeaturesMaskUnusedSlots) {
  const auto line = coordinate_features(Command::line_to(51, 255));
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(line[s], 0.0);
    EXPECT_EQ(line[kNumArgs + s], 0.0);
  }
  EXPECT_DOUBLE_EQ(line[kSlotX], 0.2);
  EXPECT_DOUBLE_EQ(line[kSlotY], 1.0);
  EXPECT_EQ(line[kNumArgs + kSlotX], 1.0);
  for (double v : coordinate_features(Command::close())) EXPECT_EQ(v, 0.0);
  for (double v : coordinate_features(Command::eos())) EXPECT_EQ(v, 0.0);
}

TEST(Embedding, DeterministicAndShaped) {
  Fixture a, b;
  const PaddedGlyph g = pad_to_fixed(two_path_glyph(), kPaths, kCmds);
  const MatD xa = embed_path_sequence(g, 0, a.emb, a.params);
  const MatD xb = embed_path_sequence(g, 0, b.emb, b.params);
  EXPECT_EQ(xa.rows(), kCmds);
  EXPECT_EQ(xa.cols(), kDim);
  EXPECT_EQ(xa, xb);
}

TEST(Embedding, ZeroProjectionIsolatesTypeRows) {
  Fixture f;
  f.params[f.emb.coord_proj.weight].setZero();
  f.params[f.emb.coord_proj.bias].setZero();
  const auto& table = f.params[f.emb.type_table];
  for (const Command& c : {Command::move_to(3, 4), Command::line_to(9, 9),
                           Command::cubic_to(1, 2, 3, 4, 5, 6), Command::close(),
                           Command::eos()}) {
    const nn::RowVector<double> e = embed_command(c, f.emb, f.params);
    EXPECT_EQ(e, table.row(static_cast<int>(c.kind)));
  }
}

TEST(Embedding, PaddingRowsDifferOnlyByIndex) {
  Fixture f;
  const PaddedGlyph g = pad_to_fixed(two_path_glyph(), kPaths, kCmds);
  const MatD x = embed_path_sequence(g, 2, f.emb, f.params);
  const auto& idx = f.params[f.emb.index_table_cmd];
  const nn::RowVector<double> eos = embed_command(Command::eos(), f.emb, f.params);
  for (int j = 0; j < kCmds; ++j) {
    EXPECT_LE((x.row(j) - idx.row(j) - eos).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_NE(x.row(0), x.row(1));
}

TEST(Embedding, PermutingCommandsChangesOutput) {
  Fixture f;
  Glyph g = two_path_glyph();
  const MatD before = embed_path_sequence(pad_to_fixed(g, kPaths, kCmds), 0, f.emb, f.params);
  std::swap(g.paths[0].commands[1], g.paths[0].commands[2]);
  const MatD after = embed_path_sequence(pad_to_fixed(g, kPaths, kCmds), 0, f.emb, f.params);
  EXPECT_GT((before - after).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Embedding, PathIndexAddsTable) {
  Fixture f;
  MatD x = MatD::Zero(kPaths, kDim);
  f.emb.add_path_index(f.params, x);
  EXPECT_EQ(x, f.params[f.emb.index_table_path]);
}

TEST(Embedding, ParameterGradients) {
  Fixture f;
  const PaddedGlyph g = pad_to_fixed(two_path_glyph(), kPaths, kCmds);
  const int rows[] = {0, 1, 2};
  const MatD r = random_matrix(f.rng, 3 * kCmds, kDim);
  auto run = [&](Embedding<double>::Cache* cache) {
    MatD x = f.emb.embed_rows(f.params, g, rows, cache);
    f.emb.add_command_index(f.params, x);
    return x;
  };
  Embedding<double>::Cache cache;
  run(&cache);
  nn::GradientSet<double> grads(f.params);
  f.emb.embed_rows_backward(f.params, cache, r, grads);
  f.emb.add_command_index_backward(r, grads);
  auto loss = [&] { return probe(run(nullptr), r); };
  for (nn::ParamId id : {f.emb.type_table, f.emb.coord_proj.weight, f.emb.coord_proj.bias,
                         f.emb.index_table_cmd}) {
    check_matrix_gradient(f.params.name(id), f.params[id], grads[id], loss, 1e-5, 1e-4);
  }

  MatD p = random_matrix(f.rng, kPaths, kDim);
  const MatD rp = random_matrix(f.rng, kPaths, kDim);
  nn::GradientSet<double> pg(f.params);
  f.emb.add_path_index_backward(rp, pg);
  auto path_loss = [&] {
    MatD y = p;
    f.emb.add_path_index(f.params, y);
    return probe(y, rp);
  };
  check_matrix_gradient("index_path", f.params[f.emb.index_table_path],
                        pg[f.emb.index_table_path], path_loss);
}

}  // namespace
}  // namespace vfont
