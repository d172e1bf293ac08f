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

#include "vfont/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace vfont {
namespace {

constexpr char kMagic[4] = {'V', 'F', 'C', 'K'};
constexpr std::uint32_t kDtypeFloat32 = 0;
const char* const kFirstMoment = "adam.m/";
const char* const kSecondMoment = "adam.v/";

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string& buffer() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& in, std::size_t end) : in_(in), end_(end) {}
  void bytes(void* p, std::size_t n) {
    if (n > end_ - pos_) throw Error(ErrorCode::kCorruptFile, "checkpoint truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > end_ - pos_) throw Error(ErrorCode::kCorruptFile, "checkpoint truncated");
    std::string s(in_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::string meta_text(const Checkpoint& c) {
  std::ostringstream out;
  out << c.config.to_text() << "step=" << c.step << '\n'
      << "optimizer=" << (c.has_optimizer ? 1 : 0) << '\n'
      << "optimizer_steps=" << c.optimizer_steps << '\n';
  return out.str();
}

void parse_meta(const std::string& text, Checkpoint& c) {
  std::string model_lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    const std::string key = line.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : line.substr(eq + 1);
    try {
      if (key == "step") c.step = std::stoll(value);
      else if (key == "optimizer") c.has_optimizer = std::stoi(value) != 0;
      else if (key == "optimizer_steps") c.optimizer_steps = std::stoll(value);
      else model_lines += line + '\n';
    } catch (const std::exception&) {
      throw Error(ErrorCode::kCorruptFile, "bad checkpoint meta line: " + line);
    }
  }
  try {
    c.config = ModelConfig::from_text(model_lines);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad model config: ") + e.what());
  }
}

template <typename M>
CheckpointTensor tensor_of(const std::string& name, const M& m) {
  CheckpointTensor t;
  t.name = name;
  t.rows = static_cast<std::uint32_t>(m.rows());
  t.cols = static_cast<std::uint32_t>(m.cols());
  t.data.assign(m.data(), m.data() + m.size());
  return t;
}

void copy_into(const CheckpointTensor& t, nn::Matrix<float>& m) {
  if (t.rows != m.rows() || t.cols != m.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor " + t.name + " is " + std::to_string(t.rows) + "x" +
                    std::to_string(t.cols) + ", expected " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()));
  }
  std::copy(t.data.begin(), t.data.end(), m.data());
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t config_hash(const ModelConfig& config) {
  const std::string text = config.to_text();
  return fnv1a64(text.data(), text.size());
}

std::string encode_checkpoint(const Checkpoint& c, std::uint32_t version) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(version);
  w.u64(config_hash(c.config));
  w.str(meta_text(c));
  w.u32(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    w.str(t.name);
    w.u32(kDtypeFloat32);
    w.u32(t.rows);
    w.u32(t.cols);
  }
  for (const auto& t : c.tensors) w.bytes(t.data.data(), t.data.size() * sizeof(float));
  const std::uint64_t sum = fnv1a64(w.buffer().data(), w.buffer().size());
  w.u64(sum);
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  constexpr std::size_t kTrailer = sizeof(std::uint64_t);
  if (bytes.size() < sizeof kMagic + kTrailer ||
      std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::kCorruptFile, "not a checkpoint file");
  }
  const std::size_t body = bytes.size() - kTrailer;
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, kTrailer);
  if (stored != fnv1a64(bytes.data(), body)) {
    throw Error(ErrorCode::kCorruptFile, "checkpoint checksum mismatch");
  }
  Reader r(bytes, body);
  char magic[4];
  r.bytes(magic, sizeof magic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "checkpoint format version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  const std::uint64_t hash = r.u64();
  Checkpoint c;
  parse_meta(r.str(), c);
  if (hash != config_hash(c.config)) {
    throw Error(ErrorCode::kCorruptFile, "config hash does not match config");
  }
  const std::uint32_t n = r.u32();
  c.tensors.resize(n);
  for (auto& t : c.tensors) {
    t.name = r.str();
    if (r.u32() != kDtypeFloat32) throw Error(ErrorCode::kCorruptFile, "unknown dtype");
    t.rows = r.u32();
    t.cols = r.u32();
  }
  for (auto& t : c.tensors) {
    t.data.resize(static_cast<std::size_t>(t.rows) * t.cols);
    r.bytes(t.data.data(), t.data.size() * sizeof(float));
  }
  if (!r.done()) throw Error(ErrorCode::kCorruptFile, "trailing bytes in checkpoint");
  return c;
}

Checkpoint make_checkpoint(const FontStyleModel<float>& model, const Adam<float>* optimizer,
                           std::int64_t step) {
  Checkpoint c;
  c.config = model.config();
  c.step = step;
  const auto& params = model.params();
  for (int i = 0; i < params.size(); ++i) c.tensors.push_back(tensor_of(params.name(i), params[i]));
  if (optimizer != nullptr) {
    c.has_optimizer = true;
    c.optimizer_steps = optimizer->steps_taken();
    for (int i = 0; i < params.size(); ++i) {
      c.tensors.push_back(tensor_of(kFirstMoment + params.name(i), optimizer->first_moment()[i]));
    }
    for (int i = 0; i < params.size(); ++i) {
      c.tensors.push_back(tensor_of(kSecondMoment + params.name(i), optimizer->second_moment()[i]));
    }
  }
  return c;
}

void restore_checkpoint(const Checkpoint& c, FontStyleModel<float>& model,
                        Adam<float>* optimizer) {
  if (!(c.config == model.config())) {
    throw Error(ErrorCode::kShapeMismatch,
                "checkpoint model config differs:\n" + c.config.to_text() + "vs\n" +
                    model.config().to_text());
  }
  auto& params = model.params();
  const std::size_t n = static_cast<std::size_t>(params.size());
  const std::size_t expected = c.has_optimizer ? 3 * n : n;
  if (c.tensors.size() != expected) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint holds " +
                                               std::to_string(c.tensors.size()) +
                                               " tensors, expected " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = c.tensors[i];
    if (t.name != params.name(static_cast<int>(i))) {
      throw Error(ErrorCode::kShapeMismatch, "unexpected tensor " + t.name);
    }
    copy_into(t, params[static_cast<int>(i)]);
  }
  if (optimizer != nullptr) {
    if (!c.has_optimizer) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint has no optimizer state");
    }
    *optimizer = Adam<float>(params);
    for (std::size_t i = 0; i < n; ++i) {
      copy_into(c.tensors[n + i], optimizer->first_moment()[static_cast<int>(i)]);
      copy_into(c.tensors[2 * n + i], optimizer->second_moment()[static_cast<int>(i)]);
    }
    optimizer->set_steps_taken(c.optimizer_steps);
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void save_checkpoint(const std::filesystem::path& path, const FontStyleModel<float>& model,
                     const Adam<float>* optimizer, std::int64_t step) {
  save_checkpoint(path, make_checkpoint(model, optimizer, step));
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  const Checkpoint c = read_checkpoint(path);
  LoadedModel out{FontStyleModel<float>(c.config, 0), std::nullopt, c.step};
  if (c.has_optimizer) {
    out.optimizer.emplace();
    restore_checkpoint(c, out.model, &*out.optimizer);
  } else {
    restore_checkpoint(c, out.model, nullptr);
  }
  return out;
}

}  // namespace vfont
