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

// vfont: dataset synthesis, training, generation, evaluation and rendering.
//
// Exit codes: 0 ok, 2 usage or unparsable input, 3 I/O, 4 numeric failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "vfont/checkpoint.hpp"
#include "vfont/dataset.hpp"
#include "vfont/eval.hpp"
#include "vfont/geometry.hpp"
#include "vfont/svg.hpp"
#include "vfont/synth.hpp"
#include "vfont/training.hpp"

namespace fs = std::filesystem;
using namespace vfont;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kCorruptFile:
    case ErrorCode::kVersionMismatch: return kExitIo;
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kGenerationFailed: return kExitNumeric;
    default: return kExitUsage;
  }
}

// Reads a glyph file, attributing parse errors to the file.
Glyph load_glyph(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    Glyph g = canonical_path_order(normalize(parse_glyph_file(buf.str())));
    validate(g);
    return g;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what(), e.index());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
}

int default_threads() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct SynthArgs {
  std::uint64_t seed = 0;
  int styles = 4;
  int contents = 16;
  fs::path out;
};

int run_synth(const SynthArgs& a) {
  if (a.styles < 2 || a.contents < 2) {
    std::cerr << "synth: --styles and --contents must be >= 2\n";
    return kExitUsage;
  }
  write_dataset(a.out, make_dataset(synth_dataset(a.seed, a.styles, a.contents)));
  return 0;
}

struct TrainArgs {
  fs::path config;
  fs::path data;
  fs::path out;
  fs::path resume;
  std::vector<std::string> overrides;
  int threads = 0;
};

int run_train(const TrainArgs& a) {
  TrainConfig cfg;
  if (!a.config.empty()) cfg = read_train_config(a.config);
  for (const auto& kv : a.overrides) cfg.apply_text(kv);
  cfg.check();
  const Dataset dataset = read_dataset(a.data);
  const DatasetSplit split = dataset.train();
  ensure_dir(a.out);
  write_text(a.out / "config.txt", cfg.to_text());

  TrainState state = TrainState::fresh(cfg);
  if (!a.resume.empty()) {
    const Checkpoint ck = read_checkpoint(a.resume);
    restore_checkpoint(ck, state.model, &state.optimizer);
    state.step = ck.step;
  }

  const fs::path metrics_path = a.out / "metrics.csv";
  const bool append = !a.resume.empty() && fs::exists(metrics_path);
  std::ofstream metrics(metrics_path, append ? std::ios::app : std::ios::trunc);
  if (!metrics) throw Error(ErrorCode::kIo, "cannot write " + metrics_path.string());
  if (!append) metrics << metrics_csv_header() << '\n';

  TrainHooks hooks;
  hooks.threads = a.threads > 0 ? a.threads : default_threads();
  hooks.on_step = [&](const StepMetrics& m) {
    metrics << format_metrics_row(m) << std::endl;
  };
  hooks.on_checkpoint = [&](const TrainState& s) {
    const std::int64_t epoch = s.step / steps_per_epoch(cfg, split);
    save_checkpoint(a.out / ("epoch" + std::to_string(epoch) + ".vfck"), s.model,
                    &s.optimizer, s.step);
  };
  try {
    train(cfg, split, state, hooks);
  } catch (const Error& e) {
    metrics.flush();
    if (e.code() == ErrorCode::kNonFiniteLoss) {
      std::cerr << "train: " << e.what() << " (step " << e.index().value_or(-1) << ")\n";
      return kExitNumeric;
    }
    throw;
  }
  metrics.flush();
  if (!metrics) throw Error(ErrorCode::kIo, "metrics write failed");
  save_checkpoint(a.out / "final.vfck", state.model, &state.optimizer, state.step);
  return 0;
}

struct GenerateArgs {
  fs::path checkpoint;
  fs::path content;
  fs::path style;
  fs::path out;
};

int run_generate(const GenerateArgs& a) {
  const Glyph content = load_glyph(a.content);
  const Glyph style = load_glyph(a.style);
  const LoadedModel loaded = load_checkpoint(a.checkpoint);
  const auto& c = loaded.model.config();
  const Glyph result = loaded.model.generate(pad_to_fixed(content, c.n_paths, c.n_cmds),
                                             pad_to_fixed(style, c.n_paths, c.n_cmds));
  write_glyph_file(a.out, result);
  return 0;
}

struct EvalArgs {
  fs::path checkpoint;
  fs::path data;
  fs::path out;
  fs::path dump;
  std::string split = "eval";
  int n_p = kEvalSamplesPerCommand;
  int res = kEvalResolution;
  bool identity = false;
  int threads = 0;
};

int run_eval(const EvalArgs& a) {
  if (!a.identity && a.checkpoint.empty()) {
    std::cerr << "eval: --checkpoint or --identity is required\n";
    return kExitUsage;
  }
  if (a.n_p < 1 || a.res < 1) {
    std::cerr << "eval: --np and --res must be >= 1\n";
    return kExitUsage;
  }
  std::optional<LoadedModel> loaded;
  if (!a.identity) loaded.emplace(load_checkpoint(a.checkpoint));
  const Dataset dataset = read_dataset(a.data);
  const DatasetSplit split = a.split == "train" ? dataset.train()
                             : a.split == "all" ? dataset.all.restrict_to(dataset.all.styles)
                                                : dataset.eval();
  EvalOptions options;
  options.n_p = a.n_p;
  options.resolution = a.res;
  options.threads = a.threads > 0 ? a.threads : default_threads();
  if (!a.dump.empty()) {
    ensure_dir(a.dump);
    options.dump_dir = a.dump;
  }
  const EvalReport report = loaded ? eval_split(loaded->model, split, options)
                                   : eval_split(identity_generator(), split, options);
  const std::string csv = format_report_csv(report);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
  }
  return 0;
}

struct RenderArgs {
  fs::path in;
  fs::path out;
  int res = 256;
};

int run_render(const RenderArgs& a) {
  if (a.res < 1) {
    std::cerr << "render: --res must be >= 1\n";
    return kExitUsage;
  }
  const Glyph g = load_glyph(a.in);
  write_pgm(a.out, rasterize(g, a.res, a.res));
  return 0;
}

int run_validate(const fs::path& in) {
  const Glyph g = load_glyph(in);
  pad_to_fixed(g, 12, 100);
  std::cout << in.string() << ": ok, " << g.paths.size() << " paths\n";
  return 0;
}

int run_roundtrip(const fs::path& in) {
  const Glyph g = load_glyph(in);
  const std::string text = serialize_svg(g);
  const Glyph back = parse_svg_path(text, g.viewbox);
  double drift = 0.0;
  if (back.paths.size() != g.paths.size()) {
    std::cerr << "roundtrip: path count changed\n";
    return kExitNumeric;
  }
  for (std::size_t p = 0; p < g.paths.size(); ++p) {
    const auto& a = g.paths[p].commands;
    const auto& b = back.paths[p].commands;
    if (a.size() != b.size()) {
      std::cerr << "roundtrip: command count changed in path " << p << '\n';
      return kExitNumeric;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].kind != b[k].kind) {
        std::cerr << "roundtrip: command type changed in path " << p << '\n';
        return kExitNumeric;
      }
      for (int s = 0; s < kNumArgs; ++s) {
        drift = std::max(drift, std::abs(a[k].args[s] - b[k].args[s]));
      }
    }
  }
  std::cout << text << "\nmax drift " << drift << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfont: vector glyph style transfer"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic glyph dataset");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--styles", synth.styles,
                        "Number of styles, including the content reference style");
  synth_cmd->add_option("--contents", synth.contents, "Number of contents");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset directory");
  train_cmd->add_option("--config", train_args.config, "key=value config file")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train_args.data, "Dataset directory")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint to resume from");
  train_cmd->add_option("--set", train_args.overrides,
                        "Config override key=value (repeatable)");
  train_cmd->add_option("--threads", train_args.threads, "Worker threads (default: cores)");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a glyph from content and style");
  gen_cmd->add_option("--checkpoint", gen.checkpoint, "Model checkpoint")->required();
  gen_cmd->add_option("--content", gen.content, "Content reference glyph")->required();
  gen_cmd->add_option("--style", gen.style, "Style reference glyph")->required();
  gen_cmd->add_option("--out", gen.out, "Output glyph file")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate pixel and Chamfer distances");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Model checkpoint");
  eval_cmd->add_flag("--identity", ev.identity, "Copy targets (harness self-test)");
  eval_cmd->add_option("--data", ev.data, "Dataset directory")->required();
  eval_cmd->add_option("--split", ev.split, "eval, train or all")
      ->check(CLI::IsMember({"eval", "train", "all"}));
  eval_cmd->add_option("--np", ev.n_p, "Samples per drawing command");
  eval_cmd->add_option("--res", ev.res, "Raster resolution");
  eval_cmd->add_option("--out", ev.out, "Report CSV (default: stdout)");
  eval_cmd->add_option("--dump", ev.dump, "Directory for PGM raster pairs");
  eval_cmd->add_option("--threads", ev.threads, "Worker threads (default: cores)");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Rasterize a glyph to PGM");
  render_cmd->add_option("--in", render.in, "Input glyph file")->required();
  render_cmd->add_option("--res", render.res, "Output width and height");
  render_cmd->add_option("--out", render.out, "Output PGM file")->required();

  fs::path validate_in;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a glyph file");
  validate_cmd->add_option("--in", validate_in, "Input glyph file")->required();

  fs::path roundtrip_in;
  auto* roundtrip_cmd =
      app.add_subcommand("roundtrip", "Check parse, serialize, parse stability");
  roundtrip_cmd->add_option("--in", roundtrip_in, "Input glyph file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) return run_train(train_args);
    if (*gen_cmd) return run_generate(gen);
    if (*eval_cmd) return run_eval(ev);
    if (*render_cmd) return run_render(render);
    if (*validate_cmd) return run_validate(validate_in);
    if (*roundtrip_cmd) return run_roundtrip(roundtrip_in);
  } catch (const Error& e) {
    std::cerr << "vfont: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "vfont: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
