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

#include "vfont/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vfont/geometry.hpp"
#include "vfont/nn.hpp"

namespace vfont {
namespace {

constexpr double kKappa = 0.5522847498307936;
constexpr double kCenter = 127.5;
constexpr double kQuantum = 1.0 / 64.0;
constexpr double kMinKeySeparation = 12.0;
constexpr int kMaxRetries = 100;

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : stream_(seed) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * stream_.uniform(); }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(stream_.next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  nn::MaskStream stream_;
};

// One outline vertex plus the segment leaving it.
struct Node {
  Point v;
  bool cubic = false;
  Point c1, c2;
};

std::vector<Node> outline(const Stroke& s, double h) {
  auto line = [](double x, double y) { return Node{{x, y}, false, {}, {}}; };
  switch (s.kind) {
    case StrokeKind::kHorizontalBar:
      return {line(s.x0, s.y0 - h), line(s.x1, s.y0 - h), line(s.x1, s.y0 + h),
              line(s.x0, s.y0 + h)};
    case StrokeKind::kVerticalBar:
      return {line(s.x0 - h, s.y0), line(s.x0 + h, s.y0), line(s.x0 + h, s.y1),
              line(s.x0 - h, s.y1)};
    case StrokeKind::kBendRightDown:
      return {line(s.x0, s.y0 - h),     line(s.x1 + h, s.y0 - h),
              line(s.x1 + h, s.y1),     line(s.x1 - h, s.y1),
              line(s.x1 - h, s.y0 + h), line(s.x0, s.y0 + h)};
    case StrokeKind::kBendDownRight:
      return {line(s.x0 - h, s.y0),     line(s.x0 + h, s.y0),
              line(s.x0 + h, s.y1 - h), line(s.x1, s.y1 - h),
              line(s.x1, s.y1 + h),     line(s.x0 - h, s.y1 + h)};
    case StrokeKind::kHook: {
      const double x = s.x0, w = s.hook_w;
      const double k = s.hook_k + 2.0 * h;
      Node c = line(x + h, s.y1);
      c.cubic = true;
      c.c1 = {x + h, s.y1 + 0.6 * k};
      c.c2 = {x - 0.4 * w, s.y1 + k};
      Node e = line(x - w, s.y1 + k - 2.0 * h);
      e.cubic = true;
      e.c1 = {x - 0.4 * w, s.y1 + k - 2.0 * h};
      e.c2 = {x - h, s.y1 + std::max(0.0, 0.6 * k - 2.0 * h)};
      return {line(x - h, s.y0), line(x + h, s.y0), c, line(x - w, s.y1 + k),
              e, line(x - h, s.y1)};
    }
  }
  return {};
}

double length(Point p) { return std::sqrt(p.x * p.x + p.y * p.y); }

Point quantize(Point p) {
  return {std::round(p.x / kQuantum) * kQuantum, std::round(p.y / kQuantum) * kQuantum};
}

Path emit(const std::vector<Node>& nodes, const StyleParams& style) {
  const bool transform = style.slant != 0.0 || style.scale != 1.0;
  auto place = [&](Point p) {
    if (transform) {
      p = {kCenter + style.scale * ((p.x - kCenter) - style.slant * (p.y - kCenter)),
           kCenter + style.scale * (p.y - kCenter)};
    }
    return quantize(p);
  };

  const int n = static_cast<int>(nodes.size());
  // Corner entry/exit points for vertices joining two straight segments.
  std::vector<bool> rounded(n, false);
  std::vector<Point> entry(n), exit(n);
  for (int k = 0; k < n; ++k) {
    entry[k] = exit[k] = nodes[k].v;
    const Node& prev = nodes[(k + n - 1) % n];
    if (style.corner_radius <= 0.0 || prev.cubic || nodes[k].cubic) continue;
    const Point in = nodes[k].v - prev.v;
    const Point out = nodes[(k + 1) % n].v - nodes[k].v;
    const double lin = length(in), lout = length(out);
    const double r = std::min({style.corner_radius, 0.4 * lin, 0.4 * lout});
    if (r <= 0.0) continue;
    rounded[k] = true;
    entry[k] = nodes[k].v - (r / lin) * in;
    exit[k] = nodes[k].v + (r / lout) * out;
  }

  auto corner = [&](int k) {
    const Point v = nodes[k].v;
    const Point c1 = entry[k] + kKappa * (v - entry[k]);
    const Point c2 = exit[k] + kKappa * (v - exit[k]);
    const Point a = place(c1), b = place(c2), e = place(exit[k]);
    return Command::cubic_to(a.x, a.y, b.x, b.y, e.x, e.y);
  };

  Path path;
  const Point start = place(exit[0]);
  path.commands.push_back(Command::move_to(start.x, start.y));
  for (int k = 0; k < n; ++k) {
    const int next = (k + 1) % n;
    const Point to = place(entry[next]);
    if (nodes[k].cubic) {
      const Point a = place(nodes[k].c1), b = place(nodes[k].c2);
      path.commands.push_back(Command::cubic_to(a.x, a.y, b.x, b.y, to.x, to.y));
    } else if (next != 0 || rounded[0]) {
      path.commands.push_back(Command::line_to(to.x, to.y));
    }
    if (rounded[next]) path.commands.push_back(corner(next));
  }
  path.commands.push_back(Command::close());
  return path;
}

// Height of the outline's first vertex under the identity style; strokes
// are kept apart in this key so path order is the same in every style.
double order_key(const Stroke& s) {
  const double h = StyleParams::identity().half_thickness;
  switch (s.kind) {
    case StrokeKind::kHorizontalBar:
    case StrokeKind::kBendRightDown: return s.y0 - h;
    default: return s.y0;
  }
}

Stroke random_stroke(Uniform& u) {
  Stroke s;
  s.kind = static_cast<StrokeKind>(u.integer(0, 4));
  switch (s.kind) {
    case StrokeKind::kHorizontalBar:
      s.y0 = u(50, 205);
      s.x0 = u(50, 150);
      s.x1 = std::min(s.x0 + u(40, 100), 205.0);
      break;
    case StrokeKind::kVerticalBar:
      s.x0 = u(50, 205);
      s.y0 = u(50, 150);
      s.y1 = std::min(s.y0 + u(40, 100), 205.0);
      break;
    case StrokeKind::kBendRightDown:
    case StrokeKind::kBendDownRight:
      s.x0 = u(50, 140);
      s.x1 = s.x0 + u(30, 65);
      s.y0 = u(50, 150);
      s.y1 = s.y0 + u(30, 55);
      break;
    case StrokeKind::kHook:
      s.x0 = u(85, 205);
      s.y0 = u(50, 130);
      s.y1 = s.y0 + u(35, 60);
      s.hook_w = u(20, 35);
      s.hook_k = u(8, 16);
      break;
  }
  return s;
}

std::vector<Stroke> random_layout(Uniform& u) {
  const int count = u.integer(2, 6);
  std::vector<Stroke> strokes;
  for (int attempt = 0; attempt < kMaxRetries && static_cast<int>(strokes.size()) < count;
       ++attempt) {
    const Stroke s = random_stroke(u);
    const bool clear = std::all_of(strokes.begin(), strokes.end(), [&](const Stroke& o) {
      return std::abs(order_key(o) - order_key(s)) >= kMinKeySeparation;
    });
    if (clear) strokes.push_back(s);
  }
  if (static_cast<int>(strokes.size()) < count) return {};
  return strokes;
}

bool fits(const Glyph& g, int n_paths, int n_cmds) {
  try {
    validate(g, true);
    pad_to_fixed(g, n_paths, n_cmds);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

Glyph render_strokes(const std::vector<Stroke>& strokes, const StyleParams& style) {
  Glyph g;
  for (const auto& s : strokes) g.paths.push_back(emit(outline(s, style.half_thickness), style));
  return canonical_path_order(g);
}

StyleParams random_style(std::uint64_t seed, int style_index) {
  if (style_index == 0) return StyleParams::identity();
  Uniform u(nn::mix_seed(nn::mix_seed(seed, 0x5459'4c45ULL), static_cast<std::uint64_t>(style_index)));
  StyleParams p;
  p.half_thickness = u(4, 11);
  p.corner_radius = u(0, 1) < 0.5 ? 0.0 : u(2, 6);
  p.slant = u(-0.15, 0.15);
  p.scale = u(0.85, 1.05);
  return p;
}

std::string style_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "style%02d", index);
  return buf;
}

std::string content_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%03d", index);
  return buf;
}

DatasetSplit synth_dataset(std::uint64_t seed, int n_styles, int n_contents,
                           int n_paths, int n_cmds) {
  if (n_styles < 2 || n_contents < 2) {
    throw Error(ErrorCode::kInvalidArgument, "synth_dataset needs at least 2 styles and 2 contents");
  }
  std::vector<StyleParams> styles;
  for (int s = 0; s < n_styles; ++s) styles.push_back(random_style(seed, s));

  DatasetSplit data;
  data.content_style = style_id(0);
  for (int s = 1; s < n_styles; ++s) data.styles.push_back(style_id(s));
  for (int c = 0; c < n_contents; ++c) {
    const std::string cid = content_id(c);
    data.contents.push_back(cid);
    Uniform u(nn::mix_seed(nn::mix_seed(seed, 0x434f'4e54ULL), static_cast<std::uint64_t>(c)));
    bool done = false;
    for (int attempt = 0; attempt < kMaxRetries && !done; ++attempt) {
      const auto strokes = random_layout(u);
      if (strokes.empty()) continue;
      std::vector<Glyph> glyphs;
      for (const auto& style : styles) {
        glyphs.push_back(render_strokes(strokes, style));
        if (!fits(glyphs.back(), n_paths, n_cmds)) break;
      }
      if (glyphs.size() != styles.size() || !fits(glyphs.back(), n_paths, n_cmds)) continue;
      for (int s = 0; s < n_styles; ++s) {
        data.glyphs.emplace(std::make_pair(style_id(s), cid), std::move(glyphs[s]));
      }
      done = true;
    }
    if (!done) {
      throw Error(ErrorCode::kGenerationFailed, "no valid layout for content " + cid, c);
    }
  }
  for (const auto& s : data.styles) {
    for (const auto& c : data.contents) data.pairs.push_back({s, c});
  }
  return data;
}

}  // namespace vfont
