// Copyright 2026 The LQE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/*
 HYPC hypercube files. All integers little-endian.

   offset  size        field
   0       4           magic "HYPC"
   4       2           version (u16) = 1
   6       16          B, C, H, W (u32 each)
   22      8 C         wavelengths in nm (f64), strictly increasing
   ...     4 BCHW      reflectance (f32), B-major then C, H, W
   optional label block:
   ...     4           magic "LBLS"
   ...     2           K (u16)
   ...     2           ignore value (u16)
   ...     2 BHW       labels (u16), B-major then H, W

 The file must end exactly after the reflectance payload or after the label
 block. Reflectances must be finite, labels in [0, K) or equal to the ignore
 value.
*/

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/hypercube.hpp"

namespace lqe {

inline constexpr std::uint16_t kHypcVersion = 1;

class ParseError : public DataError {
 public:
  enum class Kind {
    kBadMagic,
    kUnsupportedVersion,
    kInvalidDims,
    kTruncated,
    kTrailingBytes,
    kNonIncreasingWavelengths,
    kNonFiniteValue,
    kBadLabelMagic,
    kLabelOutOfRange,
    kIo,
  };

  ParseError(Kind kind, std::uint64_t offset, const std::string& what);

  Kind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

std::string to_string(ParseError::Kind kind);

struct CubeFile {
  Cube cube;
  std::optional<LabelMap> labels;
};

/// Decodes a complete HYPC image held in memory.
CubeFile parse_cube(std::span<const std::uint8_t> bytes);

/// Encodes; reflectances are narrowed to float32.
std::vector<std::uint8_t> serialize_cube(const Cube& cube, const LabelMap* labels = nullptr);

CubeFile read_cube(const std::filesystem::path& path);
void write_cube(const std::filesystem::path& path, const Cube& cube, const LabelMap* labels = nullptr);

}  // namespace lqe
