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

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

#include "vfont/losses.hpp"

namespace vfont {

double eval_chamfer(const Glyph& pred, const Glyph& target, int n_p,
                    NearestNeighbor method) {
  return chamfer_distance(glyph_point_cloud(pred, n_p), glyph_point_cloud(target, n_p),
                          method);
}

double eval_pixel(const Glyph& pred, const Glyph& target, int resolution) {
  return pixel_distance(rasterize(pred, resolution, resolution),
                        rasterize(target, resolution, resolution));
}

GlyphGenerator model_generator(const FontStyleModel<float>& model) {
  return [&model](const GenerationRequest& r) {
    const auto& c = model.config();
    return model.generate(pad_to_fixed(r.content_reference, c.n_paths, c.n_cmds),
                          pad_to_fixed(r.style_reference, c.n_paths, c.n_cmds));
  };
}

GlyphGenerator identity_generator() {
  return [](const GenerationRequest& r) { return r.target; };
}

const std::string& eval_style_content(const DatasetSplit& split, const std::string& content) {
  for (const auto& c : split.contents) {
    if (c != content) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "style references need at least 2 contents");
}

EvalReport eval_split(const GlyphGenerator& generator, const DatasetSplit& split,
                      const EvalOptions& options) {
  if (options.dump_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.dump_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + options.dump_dir->string());
  }
  EvalReport report;
  report.rows.resize(split.pairs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t k = next++; k < split.pairs.size(); k = next++) {
      try {
        const TrainingPair& pair = split.pairs[k];
        const Glyph& target = split.glyph(pair.style, pair.content);
        const GenerationRequest request{
            pair.style, pair.content,
            split.glyph(pair.style, eval_style_content(split, pair.content)),
            split.content_reference(pair.content), target};
        const Glyph pred = generator(request);
        EvalRow& row = report.rows[k];
        row.style = pair.style;
        row.content = pair.content;
        const RasterImage pred_img = rasterize(pred, options.resolution, options.resolution);
        const RasterImage target_img = rasterize(target, options.resolution, options.resolution);
        row.pixel_l1 = pixel_distance(pred_img, target_img);
        try {
          row.chamfer = eval_chamfer(pred, target, options.n_p);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kEmptyCloud) throw;
          row.chamfer = std::numeric_limits<double>::quiet_NaN();
        }
        if (options.dump_dir) {
          const auto stem = *options.dump_dir / (pair.style + "_" + pair.content);
          write_pgm(stem.string() + "_pred.pgm", pred_img);
          write_pgm(stem.string() + "_target.pgm", target_img);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  double pixel_sum = 0.0, chamfer_sum = 0.0;
  int defined = 0;
  for (const auto& row : report.rows) {
    pixel_sum += row.pixel_l1;
    if (std::isnan(row.chamfer)) {
      ++report.chamfer_undefined;
    } else {
      chamfer_sum += row.chamfer;
      ++defined;
    }
  }
  if (!report.rows.empty()) report.mean_pixel_l1 = pixel_sum / report.rows.size();
  report.mean_chamfer =
      defined > 0 ? chamfer_sum / defined : std::numeric_limits<double>::quiet_NaN();
  return report;
}

EvalReport eval_split(const FontStyleModel<float>& model, const DatasetSplit& split,
                      const EvalOptions& options) {
  return eval_split(model_generator(model), split, options);
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string format_report_csv(const EvalReport& report) {
  std::string out = "style_id,content_id,pixel_l1,chamfer\n";
  for (const auto& row : report.rows) {
    out += row.style + ',' + row.content + ',' + format_double(row.pixel_l1) + ',' +
           format_double(row.chamfer) + '\n';
  }
  out += "# summary pairs=" + std::to_string(report.rows.size()) +
         " mean_pixel_l1=" + format_double(report.mean_pixel_l1) +
         " mean_chamfer=" + format_double(report.mean_chamfer) +
         " chamfer_undefined=" + std::to_string(report.chamfer_undefined) + '\n';
  return out;
}

}  // namespace vfont
