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

#include "vfont/training.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace vfont {
namespace {

constexpr std::uint64_t kModelStream = 0x4d4f'444cULL;
constexpr std::uint64_t kEpochStream = 0x4550'4f43ULL;
constexpr std::uint64_t kDropoutStream = 0x4452'4f50ULL;

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename V>
V parse_value(std::string_view key, std::string_view text) {
  V v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Field table shared by set() and to_text().
template <typename Cfg, typename F>
void for_each_field(Cfg& c, F&& f) {
  f("batch_size", c.batch_size);
  f("epochs", c.epochs);
  f("warmup_iters", c.warmup_iters);
  f("peak_lr", c.peak_lr);
  f("decay_rate", c.decay_rate);
  f("n_p_train", c.n_p_train);
  f("seed", c.seed);
  f("n_paths", c.n_paths);
  f("n_cmds", c.n_cmds);
  f("dim", c.dim);
  f("blocks", c.blocks);
  f("heads", c.heads);
  f("mlp_dim", c.mlp_dim);
  f("dropout", c.dropout);
  f("inject_block", c.inject_block);
  f("max_steps", c.max_steps);
  f("checkpoint_every", c.checkpoint_every);
  f("clip_norm", c.clip_norm);
  f("w_visibility", c.w_visibility);
  f("w_command", c.w_command);
  f("w_args", c.w_args);
  f("w_chamfer", c.w_chamfer);
}

}  // namespace

ModelConfig TrainConfig::model_config() const {
  ModelConfig m;
  m.n_paths = n_paths;
  m.n_cmds = n_cmds;
  m.dim = dim;
  m.blocks = blocks;
  m.heads = heads;
  m.mlp_dim = mlp_dim;
  m.dropout = dropout;
  m.inject_block = inject_block;
  return m;
}

LossWeights TrainConfig::loss_weights() const {
  return {w_visibility, w_command, w_args, w_chamfer};
}

void TrainConfig::set(std::string_view key, std::string_view value) {
  bool found = false;
  for_each_field(*this, [&](std::string_view name, auto& field) {
    if (name != key) return;
    found = true;
    field = parse_value<std::decay_t<decltype(field)>>(key, value);
  });
  if (!found) {
    throw Error(ErrorCode::kInvalidArgument, "unknown config key: " + std::string(key));
  }
}

void TrainConfig::apply_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "expected key=value: " + std::string(line));
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string TrainConfig::to_text() const {
  std::string out;
  for_each_field(*this, [&](std::string_view name, const auto& field) {
    out += name;
    out += '=';
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(field)>>) {
      out += format_double(field);
    } else {
      out += std::to_string(field);
    }
    out += '\n';
  });
  return out;
}

void TrainConfig::check() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(batch_size >= 1, "batch_size must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(warmup_iters >= 1, "warmup_iters must be >= 1");
  require(peak_lr > 0.0, "peak_lr must be > 0");
  require(decay_rate > 0.0 && decay_rate <= 1.0, "decay_rate must be in (0, 1]");
  require(n_p_train >= 1, "n_p_train must be >= 1");
  require(max_steps >= 0, "max_steps must be >= 0");
  require(checkpoint_every >= 1, "checkpoint_every must be >= 1");
  require(clip_norm > 0.0, "clip_norm must be > 0");
  model_config().check();
}

TrainConfig read_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  TrainConfig cfg;
  cfg.apply_text(buf.str());
  return cfg;
}

double lr_schedule(std::int64_t step, const TrainConfig& cfg) {
  if (step <= cfg.warmup_iters) {
    return cfg.peak_lr * static_cast<double>(step) / cfg.warmup_iters;
  }
  return cfg.peak_lr * std::pow(cfg.decay_rate, static_cast<double>(step - cfg.warmup_iters));
}

std::int64_t steps_per_epoch(const TrainConfig& cfg, const DatasetSplit& data) {
  const auto n = static_cast<std::int64_t>(data.pairs.size());
  return (n + cfg.batch_size - 1) / cfg.batch_size;
}

std::int64_t total_steps(const TrainConfig& cfg, const DatasetSplit& data) {
  const std::int64_t full = steps_per_epoch(cfg, data) * cfg.epochs;
  return cfg.max_steps > 0 ? std::min(full, cfg.max_steps) : full;
}

std::vector<BatchItem> batch_at(const TrainConfig& cfg, const DatasetSplit& data,
                                std::int64_t step) {
  const std::int64_t spe = steps_per_epoch(cfg, data);
  const std::int64_t epoch = step / spe;
  const std::int64_t within = step % spe;
  const std::size_t n = data.pairs.size();

  nn::MaskStream stream(nn::mix_seed(nn::mix_seed(cfg.seed, kEpochStream),
                                     static_cast<std::uint64_t>(epoch)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[stream.next() % i]);
  }
  // One style-reference draw per pair, in pair order, for the whole epoch.
  const std::size_t n_contents = data.contents.size();
  std::vector<std::size_t> draw(n);
  for (std::size_t i = 0; i < n; ++i) draw[i] = stream.next() % (n_contents - 1);

  std::vector<BatchItem> items;
  const std::size_t begin = static_cast<std::size_t>(within) * cfg.batch_size;
  const std::size_t end = std::min(n, begin + static_cast<std::size_t>(cfg.batch_size));
  for (std::size_t k = begin; k < end; ++k) {
    const std::size_t p = order[k];
    const TrainingPair& pair = data.pairs[p];
    const auto own = static_cast<std::size_t>(
        std::find(data.contents.begin(), data.contents.end(), pair.content) -
        data.contents.begin());
    std::size_t pick = draw[p];
    if (pick >= own) ++pick;
    items.push_back({pair, data.contents[pick]});
  }
  return items;
}

std::string metrics_csv_header() {
  return "step,lr,loss_vis,loss_cmd,loss_args,loss_cfr,loss_total";
}

std::string format_metrics_row(const StepMetrics& m) {
  return std::to_string(m.step) + ',' + format_double(m.lr) + ',' +
         format_double(m.loss.visibility) + ',' + format_double(m.loss.command) + ',' +
         format_double(m.loss.args) + ',' + format_double(m.loss.chamfer) + ',' +
         format_double(m.loss.total);
}

TrainState TrainState::fresh(const TrainConfig& cfg) {
  FontStyleModel<float> model(cfg.model_config(), nn::mix_seed(cfg.seed, kModelStream));
  Adam<float> optimizer(model.params());
  return TrainState{std::move(model), std::move(optimizer), 0};
}

namespace {

struct ItemResult {
  LossBreakdown loss;
};

// Per-item gradients are added to the batch total strictly in item order, so
// the sum does not depend on how items are spread over threads.
class OrderedAccumulator {
 public:
  explicit OrderedAccumulator(nn::GradientSet<float>& total) : total_(total) {}

  void add(std::size_t index, const nn::GradientSet<float>& g) {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return next_ == index; });
    total_.add(g);
    ++next_;
    ready_.notify_all();
  }

 private:
  nn::GradientSet<float>& total_;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::size_t next_ = 0;
};

}  // namespace

std::vector<StepMetrics> train(const TrainConfig& cfg, const DatasetSplit& data,
                               TrainState& state, const TrainHooks& hooks) {
  cfg.check();
  if (data.pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no training pairs");
  if (data.contents.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "style references need at least 2 contents");
  }
  if (!(state.model.config() == cfg.model_config())) {
    throw Error(ErrorCode::kShapeMismatch, "model config does not match training config");
  }

  std::map<std::pair<std::string, std::string>, PaddedGlyph> padded;
  for (const auto& [key, glyph] : data.glyphs) {
    padded.emplace(key, pad_to_fixed(glyph, cfg.n_paths, cfg.n_cmds));
  }
  auto lookup = [&](const std::string& style, const std::string& content) -> const PaddedGlyph& {
    const auto it = padded.find({style, content});
    if (it == padded.end()) {
      throw Error(ErrorCode::kInvalidArgument, "missing glyph " + style + "/" + content);
    }
    return it->second;
  };

  const LossWeights weights = cfg.loss_weights();
  const std::int64_t spe = steps_per_epoch(cfg, data);
  const std::int64_t last = total_steps(cfg, data);
  const std::int64_t stop = hooks.stop_at >= 0 ? std::min(hooks.stop_at, last) : last;
  const int threads = std::max(1, hooks.threads);

  nn::GradientSet<float> total(state.model.params());
  std::vector<StepMetrics> log;

  while (state.step < stop) {
    const std::int64_t step = state.step;
    const auto items = batch_at(cfg, data, step);
    const std::size_t n_items = items.size();
    const double inv_batch = 1.0 / static_cast<double>(n_items);
    std::vector<ItemResult> results(n_items);
    total.set_zero();
    OrderedAccumulator accumulator(total);

    auto run_item = [&](std::size_t k, nn::GradientSet<float>& scratch) {
      const BatchItem& item = items[k];
      const PaddedGlyph& style = lookup(item.pair.style, item.style_content);
      const PaddedGlyph& content = lookup(data.content_style, item.pair.content);
      const PaddedGlyph& target = lookup(item.pair.style, item.pair.content);
      std::vector<int> rows;
      for (int i = 0; i < cfg.n_paths; ++i) {
        if (target.visible(i)) rows.push_back(i);
      }
      nn::DropoutContext drop{
          true, cfg.dropout,
          nn::mix_seed(nn::mix_seed(nn::mix_seed(cfg.seed, kDropoutStream),
                                    static_cast<std::uint64_t>(step)),
                       k),
          0};
      typename FontStyleModel<float>::Trace trace;
      const Prediction pred = state.model.forward(style, content, rows, drop, trace);
      Prediction grad = Prediction::zeros(cfg.n_paths, cfg.n_cmds);
      results[k].loss = total_loss(pred, target, weights, cfg.n_p_train, &grad);
      for (auto* v : {&grad.visibility_logits, &grad.command_logits, &grad.args}) {
        for (double& g : *v) g *= inv_batch;
      }
      scratch.set_zero();
      state.model.backward(trace, grad, scratch);
    };

    const int workers = static_cast<int>(std::min<std::size_t>(threads, n_items));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&](int w) {
      nn::GradientSet<float> scratch(state.model.params());
      for (std::size_t k = w; k < n_items; k += workers) {
        try {
          run_item(k, scratch);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          scratch.set_zero();
        }
        accumulator.add(k, scratch);
      }
    };
    if (workers == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    StepMetrics m;
    m.step = step;
    m.lr = lr_schedule(step, cfg);
    for (const auto& r : results) {
      m.loss.visibility += r.loss.visibility * inv_batch;
      m.loss.command += r.loss.command * inv_batch;
      m.loss.args += r.loss.args * inv_batch;
      m.loss.chamfer += r.loss.chamfer * inv_batch;
      m.loss.total += r.loss.total * inv_batch;
    }
    const double norm = total.global_norm();
    if (!std::isfinite(m.loss.total) || !std::isfinite(norm)) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  "non-finite loss or gradient at step " + std::to_string(step), step);
    }
    if (norm > cfg.clip_norm) total.scale(static_cast<float>(cfg.clip_norm / norm));
    state.optimizer.step(state.model.params(), total, m.lr);
    state.step = step + 1;

    log.push_back(m);
    if (hooks.on_step) hooks.on_step(m);
    if (hooks.on_checkpoint && state.step % spe == 0 &&
        (state.step / spe) % cfg.checkpoint_every == 0) {
      hooks.on_checkpoint(state);
    }
  }
  return log;
}

}  // namespace vfont
