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

// Procedural glyph families. A content is a handful of strokes laid out on
// the 256-grid; a style is a parametric transform (stroke thickness, corner
// rounding, slant, scale) applied to every content's outline.

#include <cstdint>
#include <vector>

#include "vfont/dataset.hpp"
#include "vfont/svg.hpp"

namespace vfont {

enum class StrokeKind : std::uint8_t {
  kHorizontalBar,
  kVerticalBar,
  kBendRightDown,  // horizontal run, then down
  kBendDownRight,  // vertical run, then right
  kHook,           // vertical run ending in a leftward cubic hook
};

struct Stroke {
  StrokeKind kind = StrokeKind::kHorizontalBar;
  // Centerline anchors; meaning depends on kind.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  // Hook width and extra drop below the thickness.
  double hook_w = 0, hook_k = 0;
};

struct StyleParams {
  double half_thickness = 7.0;
  double corner_radius = 0.0;
  double slant = 0.0;
  double scale = 1.0;

  static StyleParams identity() { return {}; }
  bool operator==(const StyleParams&) const = default;
};

// Outline of the strokes under a style; canonically ordered, viewbox 255.
Glyph render_strokes(const std::vector<Stroke>& strokes, const StyleParams& style);

StyleParams random_style(std::uint64_t seed, int style_index);

// Style 0 is the identity style and serves as the content reference font.
// Throws GenerationFailed when no valid layout is found within 100 retries.
DatasetSplit synth_dataset(std::uint64_t seed, int n_styles, int n_contents,
                           int n_paths = 12, int n_cmds = 100);

std::string style_id(int index);
std::string content_id(int index);

}  // namespace vfont
