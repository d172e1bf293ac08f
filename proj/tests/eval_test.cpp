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

#include "vfont/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "support/oracles.hpp"
#include "vfont/geometry.hpp"
#include "vfont/synth.hpp"

namespace vfont {
namespace {

using testing::brute_chamfer;
using testing::de_casteljau;
using testing::P2;
using testing::random_glyph;

Glyph square(double lo, double hi) {
  Glyph g;
  g.paths.push_back({{Command::move_to(lo, lo), Command::line_to(hi, lo), Command::line_to(hi, hi),
                      Command::line_to(lo, hi), Command::close()},
                     true});
  return g;
}

// Whole-glyph cloud built independently of the library sampler.
std::vector<P2> oracle_cloud(const Glyph& g, int n_p) {
  std::vector<P2> out;
  for (const Path& path : g.paths) {
    if (!path.visible) continue;
    P2 pen{}, start{};
    for (const Command& c : path.commands) {
      switch (c.kind) {
        case CommandType::kM:
          pen = start = {c.x(), c.y()};
          break;
        case CommandType::kL:
          for (int k = 0; k < n_p; ++k) out.push_back(testing::lerp(pen, {c.x(), c.y()}, double(k) / n_p));
          pen = {c.x(), c.y()};
          break;
        case CommandType::kC:
          for (int k = 0; k < n_p; ++k) {
            out.push_back(de_casteljau(pen, {c.args[0], c.args[1]}, {c.args[2], c.args[3]},
                                       {c.x(), c.y()}, double(k) / n_p));
          }
          pen = {c.x(), c.y()};
          break;
        case CommandType::kZ:
          pen = start;
          break;
        default:
          break;
      }
    }
  }
  return out;
}

TEST(EvalChamfer, IdentityIsZeroAndSymmetric) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Glyph a = random_glyph(rng, 3, 4), b = random_glyph(rng, 2, 4);
    EXPECT_EQ(eval_chamfer(a, a), 0.0);
    EXPECT_NEAR(eval_chamfer(a, b), eval_chamfer(b, a), 1e-9);
  }
}

TEST(EvalChamfer, MatchesWholeCloudOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Glyph a = random_glyph(rng, 1 + trial % 3, 3), b = random_glyph(rng, 1 + (trial / 3) % 3, 3);
    for (int n_p : {3, 9}) {
      const double expect = brute_chamfer(oracle_cloud(a, n_p), oracle_cloud(b, n_p));
      EXPECT_NEAR(eval_chamfer(a, b, n_p), expect, 1e-9 * std::max(1.0, expect));
      EXPECT_NEAR(eval_chamfer(a, b, n_p, NearestNeighbor::kBruteForce), expect,
                  1e-9 * std::max(1.0, expect));
    }
  }
}

TEST(EvalChamfer, SinglePathEqualsPathChamfer) {
  std::mt19937_64 rng(3);
  const Glyph a = random_glyph(rng, 1, 4), b = random_glyph(rng, 1, 4);
  const double direct = chamfer_distance(path_point_cloud(a.paths[0], 99),
                                         path_point_cloud(b.paths[0], 99));
  EXPECT_NEAR(eval_chamfer(a, b), direct, 1e-9 * direct);
}

TEST(EvalChamfer, ShiftIncreasesDistance) {
  const Glyph a = square(50, 150), b = square(60, 160);
  EXPECT_GT(eval_chamfer(a, b), 0.0);
  EXPECT_GT(eval_chamfer(a, square(70, 170)), eval_chamfer(a, b));
}

TEST(EvalChamfer, EmptyGlyphIsUndefined) {
  EXPECT_THROW(eval_chamfer(Glyph{}, square(0, 10)), Error);
}

TEST(EvalChamfer, SampleDensityStability) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto [a, b] = testing::smooth_pair(rng, 10.0);
    const double coarse = eval_chamfer(a, b, 9), fine = eval_chamfer(a, b, 99);
    EXPECT_LT(std::abs(coarse - fine) / fine, 0.15) << coarse << " vs " << fine;
  }
}

TEST(EvalPixel, KnownValues) {
  const Glyph full = square(0, 255);
  EXPECT_EQ(eval_pixel(full, full), 0.0);
  EXPECT_DOUBLE_EQ(eval_pixel(full, Glyph{}), 1.0);
  EXPECT_EQ(eval_pixel(Glyph{}, Glyph{}), 0.0);
  // Left half vs full: half the pixels differ.
  Glyph half;
  half.paths.push_back({{Command::move_to(0, 0), Command::line_to(127.5, 0),
                         Command::line_to(127.5, 255), Command::line_to(0, 255), Command::close()},
                        true});
  EXPECT_NEAR(eval_pixel(half, full), 0.5, 1.0 / 128);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const double v = eval_pixel(random_glyph(rng, 2, 3), random_glyph(rng, 2, 3));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

class EvalSplitTest : public ::testing::Test {
 protected:
  static const DatasetSplit& data() {
    static const DatasetSplit d = synth_dataset(3, 3, 4);
    return d;
  }
};

TEST_F(EvalSplitTest, IdentityGeneratorScoresZero) {
  const EvalReport r = eval_split(identity_generator(), data());
  ASSERT_EQ(r.rows.size(), 8u);
  for (const EvalRow& row : r.rows) {
    EXPECT_EQ(row.pixel_l1, 0.0);
    EXPECT_EQ(row.chamfer, 0.0);
  }
  EXPECT_EQ(r.mean_pixel_l1, 0.0);
  EXPECT_EQ(r.mean_chamfer, 0.0);
  EXPECT_EQ(r.chamfer_undefined, 0);
}

TEST_F(EvalSplitTest, ThreadCountDoesNotChangeRows) {
  const GlyphGenerator shifted = [](const GenerationRequest& req) {
    return req.style_reference;
  };
  EvalOptions one, many;
  many.threads = 4;
  const EvalReport a = eval_split(shifted, data(), one), b = eval_split(shifted, data(), many);
  EXPECT_EQ(format_report_csv(a), format_report_csv(b));
  EXPECT_GT(a.mean_chamfer, 0.0);
}

TEST_F(EvalSplitTest, RequestsUseContentReferenceAndOtherStyleContent) {
  const GlyphGenerator check = [&](const GenerationRequest& req) {
    EXPECT_EQ(&req.content_reference, &data().content_reference(req.content));
    EXPECT_EQ(&req.target, &data().glyph(req.style, req.content));
    const std::string& sc = eval_style_content(data(), req.content);
    EXPECT_NE(sc, req.content);
    EXPECT_EQ(&req.style_reference, &data().glyph(req.style, sc));
    return req.target;
  };
  eval_split(check, data());
  EXPECT_EQ(eval_style_content(data(), "c000"), "c001");
  EXPECT_EQ(eval_style_content(data(), "c002"), "c000");
}

TEST_F(EvalSplitTest, EmptyGenerationCountsAsUndefined) {
  const GlyphGenerator empty_first = [](const GenerationRequest& req) {
    return req.content == "c000" ? Glyph{} : req.target;
  };
  const EvalReport r = eval_split(empty_first, data());
  EXPECT_EQ(r.chamfer_undefined, 2);
  EXPECT_EQ(r.mean_chamfer, 0.0);
  EXPECT_GT(r.mean_pixel_l1, 0.0);
  const std::string csv = format_report_csv(r);
  EXPECT_EQ(csv.rfind("style_id,content_id,pixel_l1,chamfer\n", 0), 0u);
  EXPECT_NE(csv.find("chamfer_undefined=2"), std::string::npos);
  EXPECT_NE(csv.find(",nan\n"), std::string::npos);
}

TEST_F(EvalSplitTest, DumpsImages) {
  const auto dir = std::filesystem::temp_directory_path() / "vfont_eval_dump";
  std::filesystem::remove_all(dir);
  EvalOptions o;
  o.dump_dir = dir;
  o.resolution = 32;
  eval_split(identity_generator(), data(), o);
  EXPECT_TRUE(std::filesystem::exists(dir / "style01_c000_pred.pgm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "style02_c003_target.pgm"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace vfont
