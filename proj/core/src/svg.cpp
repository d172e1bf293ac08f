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

#include "vfont/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <tuple>

namespace vfont {

char command_letter(CommandType kind) {
  switch (kind) {
    case CommandType::kM: return 'M';
    case CommandType::kL: return 'L';
    case CommandType::kC: return 'C';
    case CommandType::kZ: return 'Z';
    default: return '?';
  }
}

std::string_view command_name(CommandType kind) {
  switch (kind) {
    case CommandType::kSOS: return "SOS";
    case CommandType::kM: return "M";
    case CommandType::kL: return "L";
    case CommandType::kC: return "C";
    case CommandType::kZ: return "Z";
    case CommandType::kEOS: return "EOS";
  }
  return "?";
}

Command Command::move_to(double x, double y) {
  Command c;
  c.kind = CommandType::kM;
  c.args[kSlotX] = x;
  c.args[kSlotY] = y;
  return c;
}

Command Command::line_to(double x, double y) {
  Command c;
  c.kind = CommandType::kL;
  c.args[kSlotX] = x;
  c.args[kSlotY] = y;
  return c;
}

Command Command::cubic_to(double x1, double y1, double x2, double y2,
                          double x, double y) {
  Command c;
  c.kind = CommandType::kC;
  c.args = {x1, y1, x2, y2, x, y};
  return c;
}

Command Command::close() {
  Command c;
  c.kind = CommandType::kZ;
  return c;
}

Command Command::eos() { return Command{}; }

bool PaddedGlyph::row_is_padding(int path) const {
  for (int j = 0; j < n_cmds; ++j) {
    if (type(path, j) != CommandType::kEOS) return false;
  }
  return true;
}

namespace {

bool is_separator(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == ',';
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

struct PendingCommand {
  CommandType kind = CommandType::kEOS;
  std::vector<double> numbers;
  std::size_t offset = 0;
};

class PathDataReader {
 public:
  explicit PathDataReader(std::string_view text) : text_(text) {}

  Glyph read(Viewbox viewbox) {
    glyph_.viewbox = viewbox;
    std::optional<PendingCommand> pending;
    while (true) {
      while (pos_ < text_.size() && is_separator(text_[pos_])) ++pos_;
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      if (is_alpha(c) && c != 'e' && c != 'E') {
        if (pending) flush(*pending);
        pending = PendingCommand{letter_to_kind(c), {}, pos_};
        ++pos_;
        continue;
      }
      const double value = read_number();
      if (!pending) {
        throw Error(ErrorCode::kArityMismatch,
                    "number before any command at offset " +
                        std::to_string(pos_));
      }
      pending->numbers.push_back(value);
    }
    if (pending) flush(*pending);
    close_path();
    return std::move(glyph_);
  }

 private:
  CommandType letter_to_kind(char c) const {
    switch (c) {
      case 'M': return CommandType::kM;
      case 'L': return CommandType::kL;
      case 'C': return CommandType::kC;
      case 'Z': return CommandType::kZ;
      default:
        throw Error(ErrorCode::kUnsupportedCommand,
                    std::string("command '") + c + "' at offset " +
                        std::to_string(pos_));
    }
  }

  double read_number() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    bool negative = false;
    if (text_[p] == '+' || text_[p] == '-') {
      negative = text_[p] == '-';
      ++p;
    }
    // A second sign ("--1", "+-1") is not a number.
    if (p >= text_.size() || text_[p] == '+' || text_[p] == '-') {
      throw Error(ErrorCode::kMalformedNumber,
                  "at offset " + std::to_string(start));
    }
    const char* first = text_.data() + p;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(),
                                     value, std::chars_format::general);
    if (ec != std::errc() || ptr == first || !std::isfinite(value)) {
      throw Error(ErrorCode::kMalformedNumber,
                  "at offset " + std::to_string(start));
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return negative ? -value : value;
  }

  void flush(const PendingCommand& pending) {
    const int expected = arity(pending.kind);
    if (static_cast<int>(pending.numbers.size()) != expected) {
      throw Error(ErrorCode::kArityMismatch,
                  std::string(command_name(pending.kind)) + " expects " +
                      std::to_string(expected) + " arguments, got " +
                      std::to_string(pending.numbers.size()) +
                      " at offset " + std::to_string(pending.offset));
    }
    Command cmd;
    cmd.kind = pending.kind;
    const auto& n = pending.numbers;
    switch (pending.kind) {
      case CommandType::kM:
        if (drawn_since_move_ || closed_) close_path();
        cmd = Command::move_to(n[0], n[1]);
        has_move_ = true;
        break;
      case CommandType::kL:
        cmd = Command::line_to(n[0], n[1]);
        break;
      case CommandType::kC:
        cmd = Command::cubic_to(n[0], n[1], n[2], n[3], n[4], n[5]);
        break;
      case CommandType::kZ:
        cmd = Command::close();
        break;
      default:
        break;
    }
    if (pending.kind != CommandType::kM && !has_move_) {
      throw Error(ErrorCode::kInvalidPenSequence,
                  std::string(command_name(pending.kind)) +
                      " before any M at offset " +
                      std::to_string(pending.offset));
    }
    if (is_drawing(pending.kind)) drawn_since_move_ = true;
    if (pending.kind == CommandType::kZ) closed_ = true;
    current_.commands.push_back(cmd);
  }

  void close_path() {
    if (!current_.commands.empty()) glyph_.paths.push_back(std::move(current_));
    current_ = Path{};
    drawn_since_move_ = false;
    closed_ = false;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Glyph glyph_;
  Path current_;
  bool has_move_ = false;
  bool drawn_since_move_ = false;
  bool closed_ = false;
};

void append_number(std::string& out, double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

Glyph parse_svg_path(std::string_view text, Viewbox viewbox) {
  return PathDataReader(text).read(viewbox);
}

std::string serialize_svg(const Glyph& glyph) {
  std::string out;
  for (const auto& path : glyph.paths) {
    for (const auto& cmd : path.commands) {
      if (!out.empty()) out.push_back(' ');
      out.push_back(command_letter(cmd.kind));
      for (int slot = 0; slot < kNumArgs; ++slot) {
        if (!uses_slot(cmd.kind, slot)) continue;
        out.push_back(' ');
        append_number(out, cmd.args[slot]);
      }
    }
  }
  return out;
}

Glyph normalize(const Glyph& glyph) {
  const auto [w, h] = glyph.viewbox;
  if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(w) || !std::isfinite(h)) {
    throw Error(ErrorCode::kDegenerateViewbox,
                "viewbox " + std::to_string(w) + " x " + std::to_string(h));
  }
  const double scale = kCoordMax / std::max(w, h);
  const double offset_x = (kCoordMax - w * scale) / 2.0;
  const double offset_y = (kCoordMax - h * scale) / 2.0;

  Glyph out = glyph;
  out.viewbox = Viewbox{kCoordMax, kCoordMax};
  for (auto& path : out.paths) {
    for (auto& cmd : path.commands) {
      for (int slot = 0; slot < kNumArgs; ++slot) {
        if (!uses_slot(cmd.kind, slot)) {
          cmd.args[slot] = kUnusedArg;
          continue;
        }
        const bool is_x = (slot % 2) == 0;
        cmd.args[slot] = is_x ? cmd.args[slot] * scale + offset_x
                              : cmd.args[slot] * scale + offset_y;
      }
    }
  }
  return out;
}

Glyph canonical_path_order(const Glyph& glyph) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto key = [&](const Path& p) {
    for (const auto& cmd : p.commands) {
      if (cmd.kind == CommandType::kM) {
        return std::make_tuple(cmd.y(), cmd.x(), p.commands.size());
      }
    }
    return std::make_tuple(kInf, kInf, p.commands.size());
  };
  Glyph out = glyph;
  std::stable_sort(out.paths.begin(), out.paths.end(),
                   [&](const Path& a, const Path& b) { return key(a) < key(b); });
  return out;
}

void validate(const Glyph& glyph, bool normalized) {
  for (std::size_t i = 0; i < glyph.paths.size(); ++i) {
    const auto& cmds = glyph.paths[i].commands;
    if (!cmds.empty() && cmds.front().kind != CommandType::kM) {
      throw Error(ErrorCode::kInvalidPenSequence,
                  "path " + std::to_string(i) + " does not begin with M",
                  static_cast<std::int64_t>(i));
    }
    for (const auto& cmd : cmds) {
      if (cmd.kind == CommandType::kSOS || cmd.kind == CommandType::kEOS) {
        throw Error(ErrorCode::kInvalidArgument,
                    "SOS/EOS inside path " + std::to_string(i),
                    static_cast<std::int64_t>(i));
      }
      for (int slot = 0; slot < kNumArgs; ++slot) {
        const double v = cmd.args[slot];
        if (!uses_slot(cmd.kind, slot)) {
          if (v != kUnusedArg) {
            throw Error(ErrorCode::kInvalidArgument,
                        "unused argument slot not -1 in path " +
                            std::to_string(i),
                        static_cast<std::int64_t>(i));
          }
          continue;
        }
        if (!std::isfinite(v) ||
            (normalized && (v < 0.0 || v > kCoordMax))) {
          throw Error(ErrorCode::kInvalidArgument,
                      "coordinate out of range in path " + std::to_string(i),
                      static_cast<std::int64_t>(i));
        }
      }
    }
  }
}

PaddedGlyph pad_to_fixed(const Glyph& glyph, int n_paths, int n_cmds) {
  if (n_paths < 1 || n_cmds < 2) {
    throw Error(ErrorCode::kInvalidArgument, "padding sizes too small");
  }
  if (static_cast<int>(glyph.paths.size()) > n_paths) {
    throw Error(ErrorCode::kTooManyPaths,
                std::to_string(glyph.paths.size()) + " paths exceed " +
                    std::to_string(n_paths),
                n_paths);
  }
  PaddedGlyph out;
  out.n_paths = n_paths;
  out.n_cmds = n_cmds;
  const auto cells = static_cast<std::size_t>(n_paths) * n_cmds;
  out.command_types.assign(cells, CommandType::kEOS);
  out.args.assign(cells * kNumArgs, kUnusedArg);
  out.arg_mask.assign(cells * kNumArgs, 0);
  out.visibility.assign(n_paths, 0);

  for (std::size_t i = 0; i < glyph.paths.size(); ++i) {
    const auto& path = glyph.paths[i];
    if (static_cast<int>(path.commands.size()) > n_cmds - 1) {
      throw Error(ErrorCode::kTooManyCommands,
                  "path " + std::to_string(i) + " has " +
                      std::to_string(path.commands.size()) +
                      " commands, limit " + std::to_string(n_cmds - 1),
                  static_cast<std::int64_t>(i));
    }
    out.visibility[i] = path.visible ? 1 : 0;
    for (std::size_t j = 0; j < path.commands.size(); ++j) {
      const auto& cmd = path.commands[j];
      const std::size_t cell = i * n_cmds + j;
      out.command_types[cell] = cmd.kind;
      for (int slot = 0; slot < kNumArgs; ++slot) {
        const bool used = uses_slot(cmd.kind, slot);
        out.args[cell * kNumArgs + slot] = used ? cmd.args[slot] : kUnusedArg;
        out.arg_mask[cell * kNumArgs + slot] = used ? 1 : 0;
      }
    }
  }
  return out;
}

Glyph unpad(const PaddedGlyph& padded) {
  Glyph out;
  for (int i = 0; i < padded.n_paths; ++i) {
    if (!padded.visible(i)) continue;
    Path path;
    for (int j = 0; j < padded.n_cmds; ++j) {
      const CommandType kind = padded.type(i, j);
      if (kind == CommandType::kEOS) break;
      Command cmd;
      cmd.kind = kind;
      for (int slot = 0; slot < kNumArgs; ++slot) {
        cmd.args[slot] = uses_slot(kind, slot) ? padded.arg(i, j, slot)
                                               : kUnusedArg;
      }
      path.commands.push_back(cmd);
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

std::string format_glyph_file(const Glyph& glyph) {
  std::string out = "viewbox ";
  append_number(out, glyph.viewbox.width);
  out.push_back(' ');
  append_number(out, glyph.viewbox.height);
  out.push_back('\n');
  out += serialize_svg(glyph);
  out.push_back('\n');
  return out;
}

Glyph parse_glyph_file(std::string_view text) {
  Viewbox viewbox;
  constexpr std::string_view kHeader = "viewbox";
  std::size_t start = 0;
  while (start < text.size() && is_separator(text[start])) ++start;
  if (text.substr(start, kHeader.size()) == kHeader) {
    const std::size_t eol = text.find('\n', start);
    const std::string header(
        text.substr(start + kHeader.size(),
                    eol == std::string_view::npos ? std::string_view::npos
                                                  : eol - start - kHeader.size()));
    std::istringstream in(header);
    if (!(in >> viewbox.width >> viewbox.height)) {
      throw Error(ErrorCode::kMalformedNumber, "bad viewbox header");
    }
    std::string rest;
    if (in >> rest) {
      throw Error(ErrorCode::kMalformedNumber, "trailing data in viewbox header");
    }
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
  }
  return parse_svg_path(text, viewbox);
}

Glyph read_glyph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_glyph_file(ss.str());
}

void write_glyph_file(const std::filesystem::path& path, const Glyph& glyph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << format_glyph_file(glyph);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace vfont
