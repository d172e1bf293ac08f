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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vfont {

enum class ErrorCode : std::uint8_t {
  kUnsupportedCommand,
  kMalformedNumber,
  kArityMismatch,
  kDegenerateViewbox,
  kTooManyPaths,
  kTooManyCommands,
  kNonDrawingCommand,
  kInvalidPenSequence,
  kEmptyCloud,
  kResolutionMismatch,
  kNonFiniteLoss,
  kVersionMismatch,
  kShapeMismatch,
  kCorruptFile,
  kGenerationFailed,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `index()` carries the offending
// element (path, command, step, ...) when the error refers to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::int64_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::int64_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::int64_t> index_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedCommand: return "UnsupportedCommand";
    case ErrorCode::kMalformedNumber: return "MalformedNumber";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kDegenerateViewbox: return "DegenerateViewbox";
    case ErrorCode::kTooManyPaths: return "TooManyPaths";
    case ErrorCode::kTooManyCommands: return "TooManyCommands";
    case ErrorCode::kNonDrawingCommand: return "NonDrawingCommand";
    case ErrorCode::kInvalidPenSequence: return "InvalidPenSequence";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace vfont
