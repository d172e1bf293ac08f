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

// Style/content glyph collections and their on-disk layout:
//
//   DIR/manifest.txt           content_style / train_styles / eval_styles /
//                              contents lines, space separated
//   DIR/<style>/<content>.glyph  one glyph file per (style, content)

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vfont/svg.hpp"

namespace vfont {

struct TrainingPair {
  std::string style;
  std::string content;

  bool operator==(const TrainingPair&) const = default;
};

struct DatasetSplit {
  // The font every content reference is drawn from; never a target style.
  std::string content_style;
  std::vector<std::string> styles;
  std::vector<std::string> contents;
  std::vector<TrainingPair> pairs;
  std::map<std::pair<std::string, std::string>, Glyph> glyphs;

  const Glyph& glyph(const std::string& style, const std::string& content) const;
  const Glyph& content_reference(const std::string& content) const {
    return glyph(content_style, content);
  }
  // Same glyph table restricted to the given target styles.
  DatasetSplit restrict_to(const std::vector<std::string>& target_styles) const;

  bool operator==(const DatasetSplit&) const = default;
};

struct Dataset {
  DatasetSplit all;
  std::vector<std::string> train_styles;
  std::vector<std::string> eval_styles;

  DatasetSplit train() const { return all.restrict_to(train_styles); }
  DatasetSplit eval() const { return all.restrict_to(eval_styles); }
};

// Held-out target styles for a split of `all`: none below three targets
// (evaluation then reuses the training styles), otherwise about one in nine.
std::vector<std::string> default_eval_styles(const DatasetSplit& all);

Dataset make_dataset(DatasetSplit all);

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace vfont
