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

// Glyph data model restricted to the absolute M/L/C/Z subset of SVG path
// data, plus conversion to the fixed-size padded form consumed by the model.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfont/error.hpp"

namespace vfont {

enum class CommandType : std::uint8_t { kSOS = 0, kM, kL, kC, kZ, kEOS };

inline constexpr int kNumCommandTypes = 6;
inline constexpr int kNumArgs = 6;
inline constexpr double kUnusedArg = -1.0;
inline constexpr double kCoordMax = 255.0;

// Argument slot layout: (x1, y1, x2, y2, x, y).
inline constexpr int kSlotX1 = 0;
inline constexpr int kSlotY1 = 1;
inline constexpr int kSlotX2 = 2;
inline constexpr int kSlotY2 = 3;
inline constexpr int kSlotX = 4;
inline constexpr int kSlotY = 5;

constexpr int arity(CommandType kind) {
  switch (kind) {
    case CommandType::kM:
    case CommandType::kL: return 2;
    case CommandType::kC: return 6;
    default: return 0;
  }
}

constexpr bool uses_slot(CommandType kind, int slot) {
  switch (kind) {
    case CommandType::kM:
    case CommandType::kL: return slot == kSlotX || slot == kSlotY;
    case CommandType::kC: return slot >= 0 && slot < kNumArgs;
    default: return false;
  }
}

constexpr bool is_drawing(CommandType kind) {
  return kind == CommandType::kL || kind == CommandType::kC;
}

char command_letter(CommandType kind);
std::string_view command_name(CommandType kind);

struct Command {
  CommandType kind = CommandType::kEOS;
  std::array<double, kNumArgs> args{kUnusedArg, kUnusedArg, kUnusedArg,
                                    kUnusedArg, kUnusedArg, kUnusedArg};

  static Command move_to(double x, double y);
  static Command line_to(double x, double y);
  static Command cubic_to(double x1, double y1, double x2, double y2,
                          double x, double y);
  static Command close();
  static Command eos();

  double x() const { return args[kSlotX]; }
  double y() const { return args[kSlotY]; }

  bool operator==(const Command&) const = default;
};

struct Path {
  std::vector<Command> commands;
  bool visible = true;

  bool operator==(const Path&) const = default;
};

struct Viewbox {
  double width = kCoordMax;
  double height = kCoordMax;

  bool operator==(const Viewbox&) const = default;
};

struct Glyph {
  std::vector<Path> paths;
  Viewbox viewbox;

  bool operator==(const Glyph&) const = default;
};

// Fixed-size tensor form: n_paths x n_cmds command grid, EOS padded.
struct PaddedGlyph {
  int n_paths = 0;
  int n_cmds = 0;
  std::vector<CommandType> command_types;  // n_paths * n_cmds
  std::vector<double> args;                // n_paths * n_cmds * 6
  std::vector<std::uint8_t> visibility;    // n_paths
  std::vector<std::uint8_t> arg_mask;      // n_paths * n_cmds * 6

  CommandType type(int path, int cmd) const {
    return command_types[static_cast<std::size_t>(path) * n_cmds + cmd];
  }
  double arg(int path, int cmd, int slot) const {
    return args[(static_cast<std::size_t>(path) * n_cmds + cmd) * kNumArgs +
                slot];
  }
  bool mask(int path, int cmd, int slot) const {
    return arg_mask[(static_cast<std::size_t>(path) * n_cmds + cmd) *
                        kNumArgs +
                    slot] != 0;
  }
  bool visible(int path) const { return visibility[path] != 0; }
  std::span<const double, kNumArgs> arg_row(int path, int cmd) const {
    return std::span<const double, kNumArgs>(
        args.data() +
            (static_cast<std::size_t>(path) * n_cmds + cmd) * kNumArgs,
        kNumArgs);
  }
  // True when the row holds nothing but EOS tokens.
  bool row_is_padding(int path) const;

  bool operator==(const PaddedGlyph&) const = default;
};

// Parses absolute M/L/C/Z path data. A new path starts at every M that
// follows a Z or a drawing command.
Glyph parse_svg_path(std::string_view text, Viewbox viewbox = {});

// Emits "M x y L x y C ... Z" with shortest round-trip number formatting.
std::string serialize_svg(const Glyph& glyph);

// Maps coordinates into [0, 255] preserving aspect ratio, centred on the
// shorter axis. The result has a 255 x 255 viewbox.
Glyph normalize(const Glyph& glyph);

// Stable sort of paths by (first-M y, first-M x, command count).
Glyph canonical_path_order(const Glyph& glyph);

// Throws on structural violations. With `normalized` set, used coordinates
// must also lie in [0, 255].
void validate(const Glyph& glyph, bool normalized = true);

PaddedGlyph pad_to_fixed(const Glyph& glyph, int n_paths, int n_cmds);

// Visible rows, each truncated at its first EOS.
Glyph unpad(const PaddedGlyph& padded);

// Glyph file: a "viewbox W H" header line followed by path data. The header
// is optional on input (defaults to 255 x 255).
std::string format_glyph_file(const Glyph& glyph);
Glyph parse_glyph_file(std::string_view text);
Glyph read_glyph_file(const std::filesystem::path& path);
void write_glyph_file(const std::filesystem::path& path, const Glyph& glyph);

}  // namespace vfont
