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

#include "vfont/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace vfont {

Point eval_curve(const Command& cmd, Point start, double t) {
  const Point end{cmd.args[kSlotX], cmd.args[kSlotY]};
  switch (cmd.kind) {
    case CommandType::kL:
      return start + t * (end - start);
    case CommandType::kC: {
      const Point c1{cmd.args[kSlotX1], cmd.args[kSlotY1]};
      const Point c2{cmd.args[kSlotX2], cmd.args[kSlotY2]};
      const double s = 1.0 - t;
      const double b0 = s * s * s;
      const double b1 = 3.0 * s * s * t;
      const double b2 = 3.0 * s * t * t;
      const double b3 = t * t * t;
      return {b0 * start.x + b1 * c1.x + b2 * c2.x + b3 * end.x,
              b0 * start.y + b1 * c1.y + b2 * c2.y + b3 * end.y};
    }
    default:
      throw Error(ErrorCode::kNonDrawingCommand,
                  std::string(command_name(cmd.kind)) + " has no curve");
  }
}

PointCloud sample_command(const Command& cmd, Point start, int n_p) {
  PointCloud out;
  if (!is_drawing(cmd.kind) || n_p < 1) return out;
  out.reserve(n_p);
  for (int k = 0; k < n_p; ++k) {
    out.push_back(eval_curve(cmd, start, static_cast<double>(k) / n_p));
  }
  return out;
}

namespace {

void append_path_samples(const Path& path, int n_p, PointCloud& out) {
  bool has_pen = false;
  Point pen;
  Point subpath_start;
  for (const auto& cmd : path.commands) {
    switch (cmd.kind) {
      case CommandType::kM:
        pen = subpath_start = Point{cmd.x(), cmd.y()};
        has_pen = true;
        break;
      case CommandType::kL:
      case CommandType::kC: {
        if (!has_pen) {
          throw Error(ErrorCode::kInvalidPenSequence,
                      "drawing command before any M");
        }
        for (int k = 0; k < n_p; ++k) {
          out.push_back(eval_curve(cmd, pen, static_cast<double>(k) / n_p));
        }
        pen = Point{cmd.x(), cmd.y()};
        break;
      }
      case CommandType::kZ:
        pen = subpath_start;
        break;
      default:
        return;
    }
  }
}

}  // namespace

PointCloud path_point_cloud(const Path& path, int n_p) {
  PointCloud out;
  append_path_samples(path, n_p, out);
  return out;
}

PointCloud glyph_point_cloud(const Glyph& glyph, int n_p) {
  PointCloud out;
  for (const auto& path : glyph.paths) {
    if (path.visible) append_path_samples(path, n_p, out);
  }
  return out;
}

namespace {

void nearest_brute_force(const PointCloud& queries, const PointCloud& targets,
                         std::vector<int>& match, double& sum) {
  match.resize(queries.size());
  sum = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const double d = squared_distance(queries[i], targets[j]);
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    match[i] = best_j;
    sum += best;
  }
}

// Uniform bucket grid over the target cloud. Queries expand rings of cells
// until no unvisited cell can hold a closer point.
class GridIndex {
 public:
  explicit GridIndex(const PointCloud& points) : points_(points) {
    min_x_ = min_y_ = std::numeric_limits<double>::infinity();
    double max_x = -min_x_;
    double max_y = -min_y_;
    for (const auto& p : points) {
      min_x_ = std::min(min_x_, p.x);
      min_y_ = std::min(min_y_, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
    const double extent = std::max({max_x - min_x_, max_y - min_y_, 1e-9});
    const int side = std::max(
        1, static_cast<int>(std::sqrt(static_cast<double>(points.size()) / 2.0)));
    cell_ = extent / side;
    nx_ = std::max(1, static_cast<int>((max_x - min_x_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((max_y - min_y_) / cell_) + 1);
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    std::vector<int> cell_of(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
      cell_of[j] = cell_index(cell_x(points[j].x), cell_y(points[j].y));
      ++start_[cell_of[j] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    entries_.resize(points.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t j = 0; j < points.size(); ++j) {
      entries_[fill[cell_of[j]]++] = static_cast<int>(j);
    }
  }

  std::pair<int, double> nearest(Point q) const {
    const int cx = std::clamp(cell_x(q.x), 0, nx_ - 1);
    const int cy = std::clamp(cell_y(q.y), 0, ny_ - 1);
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    const int max_ring = std::max(nx_, ny_);
    for (int r = 0; r <= max_ring; ++r) {
      for (int gy = cy - r; gy <= cy + r; ++gy) {
        if (gy < 0 || gy >= ny_) continue;
        const bool edge_row = (gy == cy - r || gy == cy + r);
        for (int gx = cx - r; gx <= cx + r; ++gx) {
          if (gx < 0 || gx >= nx_) continue;
          if (!edge_row && gx != cx - r && gx != cx + r) continue;
          const int c = cell_index(gx, gy);
          for (int e = start_[c]; e < start_[c + 1]; ++e) {
            const int j = entries_[e];
            const double d = squared_distance(q, points_[j]);
            if (d < best || (d == best && j < best_j)) {
              best = d;
              best_j = j;
            }
          }
        }
      }
      // Distance from q to the outside of the searched square.
      // Sides that already reach past the grid hide no points.
      constexpr double kOpen = std::numeric_limits<double>::infinity();
      const double left =
          cx - r <= 0 ? kOpen : q.x - (min_x_ + (cx - r) * cell_);
      const double right =
          cx + r >= nx_ - 1 ? kOpen : (min_x_ + (cx + r + 1) * cell_) - q.x;
      const double top =
          cy - r <= 0 ? kOpen : q.y - (min_y_ + (cy - r) * cell_);
      const double bottom =
          cy + r >= ny_ - 1 ? kOpen : (min_y_ + (cy + r + 1) * cell_) - q.y;
      const double margin = std::min({left, right, top, bottom});
      const bool covers_all = cx - r <= 0 && cy - r <= 0 && cx + r >= nx_ - 1 &&
                              cy + r >= ny_ - 1;
      if (covers_all) break;
      if (margin > 0.0 && best < margin * margin) break;
    }
    return {best_j, best};
  }

 private:
  int cell_x(double x) const { return static_cast<int>((x - min_x_) / cell_); }
  int cell_y(double y) const { return static_cast<int>((y - min_y_) / cell_); }
  int cell_index(int gx, int gy) const {
    return std::clamp(gy, 0, ny_ - 1) * nx_ + std::clamp(gx, 0, nx_ - 1);
  }

  const PointCloud& points_;
  double min_x_, min_y_, cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<int> start_;
  std::vector<int> entries_;
};

void nearest_grid(const PointCloud& queries, const PointCloud& targets,
                  std::vector<int>& match, double& sum) {
  const GridIndex index(targets);
  match.resize(queries.size());
  sum = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto [j, d] = index.nearest(queries[i]);
    match[i] = j;
    sum += d;
  }
}

}  // namespace

ChamferMatch chamfer_match(const PointCloud& a, const PointCloud& b,
                           NearestNeighbor method) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "Chamfer distance of an empty cloud");
  }
  ChamferMatch m;
  double sum_ab = 0.0;
  double sum_ba = 0.0;
  if (method == NearestNeighbor::kGrid) {
    nearest_grid(a, b, m.a_to_b, sum_ab);
    nearest_grid(b, a, m.b_to_a, sum_ba);
  } else {
    nearest_brute_force(a, b, m.a_to_b, sum_ab);
    nearest_brute_force(b, a, m.b_to_a, sum_ba);
  }
  m.distance = sum_ab / static_cast<double>(a.size()) +
               sum_ba / static_cast<double>(b.size());
  return m;
}

double chamfer_distance(const PointCloud& a, const PointCloud& b,
                        NearestNeighbor method) {
  return chamfer_match(a, b, method).distance;
}

namespace {

void flatten_cubic(Point p0, Point p1, Point p2, Point p3,
                   std::vector<Point>& out) {
  // Wang's bound on the uniform subdivision count for a cubic.
  const Point d1 = p0 - 2.0 * p1 + p2;
  const Point d2 = p1 - 2.0 * p2 + p3;
  const double m = std::max(std::hypot(d1.x, d1.y), std::hypot(d2.x, d2.y));
  const int n = std::max(
      1, static_cast<int>(std::ceil(std::sqrt(0.75 * m / kFlatteningTolerancePx))));
  Command cmd = Command::cubic_to(p1.x, p1.y, p2.x, p2.y, p3.x, p3.y);
  for (int k = 1; k < n; ++k) {
    out.push_back(eval_curve(cmd, p0, static_cast<double>(k) / n));
  }
  out.push_back(p3);
}

}  // namespace

std::vector<std::vector<Point>> flatten_outlines(const Glyph& glyph, int height,
                                                 int width) {
  const double sx = width / glyph.viewbox.width;
  const double sy = height / glyph.viewbox.height;
  auto to_px = [&](double x, double y) { return Point{x * sx, y * sy}; };

  std::vector<std::vector<Point>> polygons;
  for (const auto& path : glyph.paths) {
    if (!path.visible) continue;
    std::vector<Point> current;
    Point subpath_start;
    bool has_pen = false;
    auto finish = [&]() {
      if (current.size() >= 2) polygons.push_back(std::move(current));
      current.clear();
    };
    for (const auto& cmd : path.commands) {
      switch (cmd.kind) {
        case CommandType::kM:
          finish();
          subpath_start = to_px(cmd.x(), cmd.y());
          current.push_back(subpath_start);
          has_pen = true;
          break;
        case CommandType::kL:
        case CommandType::kC: {
          if (!has_pen) {
            throw Error(ErrorCode::kInvalidPenSequence,
                        "drawing command before any M");
          }
          if (current.empty()) current.push_back(subpath_start);
          const Point end = to_px(cmd.x(), cmd.y());
          if (cmd.kind == CommandType::kL) {
            current.push_back(end);
          } else {
            flatten_cubic(current.back(),
                          to_px(cmd.args[kSlotX1], cmd.args[kSlotY1]),
                          to_px(cmd.args[kSlotX2], cmd.args[kSlotY2]), end,
                          current);
          }
          break;
        }
        case CommandType::kZ:
          finish();
          break;
        default:
          break;
      }
    }
    finish();
  }
  return polygons;
}

RasterImage rasterize(const Glyph& glyph, int height, int width) {
  if (height < 1 || width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "raster resolution must be positive");
  }
  RasterImage image(height, width);
  const auto polygons = flatten_outlines(glyph, height, width);
  struct Edge {
    Point a, b;
  };
  std::vector<Edge> edges;
  for (const auto& poly : polygons) {
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point a = poly[k];
      const Point b = poly[(k + 1) % poly.size()];
      if (a.y != b.y) edges.push_back({a, b});
    }
  }
  std::vector<double> crossings;
  for (int row = 0; row < height; ++row) {
    const double yc = row + 0.5;
    crossings.clear();
    for (const auto& e : edges) {
      const bool up = e.a.y <= yc && yc < e.b.y;
      const bool down = e.b.y <= yc && yc < e.a.y;
      if (!up && !down) continue;
      const double t = (yc - e.a.y) / (e.b.y - e.a.y);
      crossings.push_back(e.a.x + t * (e.b.x - e.a.x));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      // Pixel centres c + 0.5 in [x0, x1).
      const int c0 = std::max(0, static_cast<int>(std::ceil(crossings[k] - 0.5)));
      const int c1 = std::min(
          width, static_cast<int>(std::ceil(crossings[k + 1] - 0.5)));
      for (int c = c0; c < c1; ++c) image.at(row, c) = 1.0f;
    }
  }
  return image;
}

double pixel_distance(const RasterImage& a, const RasterImage& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(ErrorCode::kResolutionMismatch,
                std::to_string(a.height) + "x" + std::to_string(a.width) +
                    " vs " + std::to_string(b.height) + "x" +
                    std::to_string(b.width));
  }
  if (a.pixels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.pixels.size(); ++k) {
    sum += std::abs(static_cast<double>(a.pixels[k]) - b.pixels[k]);
  }
  return sum / static_cast<double>(a.pixels.size());
}

std::string encode_pgm(const RasterImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (float v : image.pixels) {
    const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(255.0 * (1.0 - clamped)))));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const RasterImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const std::string data = encode_pgm(image);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace vfont
