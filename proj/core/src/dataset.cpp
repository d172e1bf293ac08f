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

#include "vfont/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vfont {

const Glyph& DatasetSplit::glyph(const std::string& style,
                                 const std::string& content) const {
  const auto it = glyphs.find({style, content});
  if (it == glyphs.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no glyph for style '" + style + "', content '" + content + "'");
  }
  return it->second;
}

DatasetSplit DatasetSplit::restrict_to(
    const std::vector<std::string>& target_styles) const {
  DatasetSplit out;
  out.content_style = content_style;
  out.styles = target_styles;
  out.contents = contents;
  for (const auto& p : pairs) {
    if (std::find(target_styles.begin(), target_styles.end(), p.style) !=
        target_styles.end()) {
      out.pairs.push_back(p);
    }
  }
  for (const auto& [key, g] : glyphs) {
    if (key.first == content_style ||
        std::find(target_styles.begin(), target_styles.end(), key.first) !=
            target_styles.end()) {
      out.glyphs.emplace(key, g);
    }
  }
  return out;
}

std::vector<std::string> default_eval_styles(const DatasetSplit& all) {
  const int targets = static_cast<int>(all.styles.size());
  if (targets < 3) return all.styles;
  const int held_out = std::max(1, (targets + 4) / 9);
  return std::vector<std::string>(all.styles.end() - held_out, all.styles.end());
}

Dataset make_dataset(DatasetSplit all) {
  Dataset d;
  d.eval_styles = default_eval_styles(all);
  if (static_cast<int>(all.styles.size()) < 3) {
    d.train_styles = all.styles;
  } else {
    for (const auto& s : all.styles) {
      if (std::find(d.eval_styles.begin(), d.eval_styles.end(), s) ==
          d.eval_styles.end()) {
        d.train_styles.push_back(s);
      }
    }
  }
  d.all = std::move(all);
  return d;
}

namespace {

void write_list(std::ostream& out, const char* key,
                const std::vector<std::string>& values) {
  out << key;
  for (const auto& v : values) out << ' ' << v;
  out << '\n';
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  const auto& all = dataset.all;
  std::vector<std::string> styles = {all.content_style};
  styles.insert(styles.end(), all.styles.begin(), all.styles.end());
  for (const auto& style : styles) {
    fs::create_directories(dir / style, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir / style).string());
    for (const auto& content : all.contents) {
      write_glyph_file(dir / style / (content + ".glyph"), all.glyph(style, content));
    }
  }
  std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  out << "content_style " << all.content_style << '\n';
  write_list(out, "train_styles", dataset.train_styles);
  write_list(out, "eval_styles", dataset.eval_styles);
  write_list(out, "contents", all.contents);
  if (!out) throw Error(ErrorCode::kIo, "manifest write failed");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / "manifest.txt").string());
  Dataset d;
  std::string line;
  while (std::getline(in, line)) {
    auto words = split_words(line);
    if (words.empty()) continue;
    const std::string key = words.front();
    words.erase(words.begin());
    if (key == "content_style" && words.size() == 1) d.all.content_style = words[0];
    else if (key == "train_styles") d.train_styles = words;
    else if (key == "eval_styles") d.eval_styles = words;
    else if (key == "contents") d.all.contents = words;
    else throw Error(ErrorCode::kCorruptFile, "bad manifest line: " + line);
  }
  if (d.all.content_style.empty() || d.all.contents.empty()) {
    throw Error(ErrorCode::kCorruptFile, "manifest lacks content_style or contents");
  }
  for (const auto* list : {&d.train_styles, &d.eval_styles}) {
    for (const auto& s : *list) {
      if (std::find(d.all.styles.begin(), d.all.styles.end(), s) == d.all.styles.end()) {
        d.all.styles.push_back(s);
      }
    }
  }
  std::vector<std::string> styles = {d.all.content_style};
  styles.insert(styles.end(), d.all.styles.begin(), d.all.styles.end());
  for (const auto& style : styles) {
    for (const auto& content : d.all.contents) {
      const auto path = dir / style / (content + ".glyph");
      d.all.glyphs.emplace(std::make_pair(style, content),
                           canonical_path_order(normalize(read_glyph_file(path))));
    }
  }
  for (const auto& style : d.all.styles) {
    for (const auto& content : d.all.contents) d.all.pairs.push_back({style, content});
  }
  return d;
}

}  // namespace vfont
