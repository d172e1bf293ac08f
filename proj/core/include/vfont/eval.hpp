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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vfont/dataset.hpp"
#include "vfont/geometry.hpp"
#include "vfont/losses.hpp"
#include "vfont/model.hpp"

namespace vfont {

inline constexpr int kEvalResolution = 128;

// Whole-glyph Chamfer distance: all visible paths of each glyph merged into
// one cloud, squared 256-grid units.
double eval_chamfer(const Glyph& pred, const Glyph& target,
                    int n_p = kEvalSamplesPerCommand,
                    NearestNeighbor method = NearestNeighbor::kGrid);

// Mean absolute pixel difference of the even-odd rasterizations.
double eval_pixel(const Glyph& pred, const Glyph& target, int resolution = kEvalResolution);

struct GenerationRequest {
  const std::string& style;
  const std::string& content;
  const Glyph& style_reference;
  const Glyph& content_reference;
  const Glyph& target;
};

using GlyphGenerator = std::function<Glyph(const GenerationRequest&)>;

GlyphGenerator model_generator(const FontStyleModel<float>& model);
// Returns the target itself; a self-test of the evaluation harness.
GlyphGenerator identity_generator();

struct EvalRow {
  std::string style;
  std::string content;
  double pixel_l1 = 0.0;
  // NaN when the generated glyph has nothing to sample.
  double chamfer = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_pixel_l1 = 0.0;
  // Mean over rows with a defined Chamfer value.
  double mean_chamfer = 0.0;
  int chamfer_undefined = 0;
};

struct EvalOptions {
  int n_p = kEvalSamplesPerCommand;
  int resolution = kEvalResolution;
  int threads = 1;
  // When set, writes <style>_<content>_pred.pgm / _target.pgm here.
  std::optional<std::filesystem::path> dump_dir;
};

// Style reference for a pair: the first other content of the same style.
const std::string& eval_style_content(const DatasetSplit& split, const std::string& content);

EvalReport eval_split(const GlyphGenerator& generator, const DatasetSplit& split,
                      const EvalOptions& options = {});
EvalReport eval_split(const FontStyleModel<float>& model, const DatasetSplit& split,
                      const EvalOptions& options = {});

// "style_id,content_id,pixel_l1,chamfer" rows followed by a '#' summary line.
std::string format_report_csv(const EvalReport& report);

}  // namespace vfont
