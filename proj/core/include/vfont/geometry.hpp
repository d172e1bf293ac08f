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

// Curve evaluation, point sampling, Chamfer distance and even-odd raster
// fill on glyphs in the [0, 255] coordinate frame.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vfont/svg.hpp"

namespace vfont {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

using PointCloud = std::vector<Point>;

// r(t) for an L or C command starting at `start`. L: start + t (end - start).
// C: cubic Bezier with controls (start, (x1,y1), (x2,y2), (x,y)).
Point eval_curve(const Command& cmd, Point start, double t);

// n_p points at t = k / n_p, k = 0 .. n_p - 1, for L and C; empty otherwise.
PointCloud sample_command(const Command& cmd, Point start, int n_p);

// Union of per-command samples with the pen threaded through M and Z.
PointCloud path_point_cloud(const Path& path, int n_p);

// All visible paths merged into one cloud.
PointCloud glyph_point_cloud(const Glyph& glyph, int n_p);

enum class NearestNeighbor : std::uint8_t { kBruteForce, kGrid };

// Nearest-neighbour assignment behind a Chamfer distance. `a_to_b[i]` is the
// index in b closest to a[i]; ties go to the lowest index.
struct ChamferMatch {
  double distance = 0.0;
  std::vector<int> a_to_b;
  std::vector<int> b_to_a;
};

ChamferMatch chamfer_match(const PointCloud& a, const PointCloud& b,
                           NearestNeighbor method = NearestNeighbor::kBruteForce);

// Mean squared nearest-neighbour distance, summed over both directions.
// The grid method returns bit-identical results to brute force.
double chamfer_distance(const PointCloud& a, const PointCloud& b,
                        NearestNeighbor method = NearestNeighbor::kBruteForce);

struct RasterImage {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;  // row-major, 1 = filled (black)

  RasterImage() = default;
  RasterImage(int h, int w, float fill = 0.0f)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

  float& at(int row, int col) {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  float at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

inline constexpr double kFlatteningTolerancePx = 0.25;

// Outline polygons of the visible paths in pixel coordinates, cubic segments
// flattened to within kFlatteningTolerancePx. Every subpath is closed.
std::vector<std::vector<Point>> flatten_outlines(const Glyph& glyph, int height,
                                                 int width);

// Even-odd scanline fill sampled at pixel centres.
RasterImage rasterize(const Glyph& glyph, int height, int width);

// Mean absolute per-pixel difference.
double pixel_distance(const RasterImage& a, const RasterImage& b);

// Binary PGM (P5, maxval 255); filled pixels are written black.
std::string encode_pgm(const RasterImage& image);
void write_pgm(const std::filesystem::path& path, const RasterImage& image);

}  // namespace vfont
