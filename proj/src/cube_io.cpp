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

#include "lqe/cube_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lqe {

static_assert(std::endian::native == std::endian::little, "HYPC I/O assumes a little-endian host");

ParseError::ParseError(Kind kind, std::uint64_t offset, const std::string& what)
    : DataError(to_string(kind) + " at byte " + std::to_string(offset) + ": " + what), kind_(kind), offset_(offset) {}

std::string to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::kBadMagic: return "bad magic";
    case ParseError::Kind::kUnsupportedVersion: return "unsupported version";
    case ParseError::Kind::kInvalidDims: return "invalid dims";
    case ParseError::Kind::kTruncated: return "truncated";
    case ParseError::Kind::kTrailingBytes: return "trailing bytes";
    case ParseError::Kind::kNonIncreasingWavelengths: return "non-increasing wavelengths";
    case ParseError::Kind::kNonFiniteValue: return "non-finite value";
    case ParseError::Kind::kBadLabelMagic: return "bad label magic";
    case ParseError::Kind::kLabelOutOfRange: return "label out of range";
    case ParseError::Kind::kIo: return "i/o error";
  }
  return "unknown";
}

namespace {

constexpr std::uint64_t kHeaderSize = 4 + 2 + 4 * 4;
constexpr std::uint64_t kLabelHeaderSize = 4 + 2 + 2;

template <typename T>
T load(std::span<const std::uint8_t> bytes, std::uint64_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

void need(std::span<const std::uint8_t> bytes, std::uint64_t expected, const char* what) {
  if (bytes.size() < expected) {
    throw ParseError(ParseError::Kind::kTruncated, bytes.size(),
                     std::string(what) + ": expected at least " + std::to_string(expected) + " bytes, file has " +
                         std::to_string(bytes.size()));
  }
}

}  // namespace

CubeFile parse_cube(std::span<const std::uint8_t> bytes) {
  need(bytes, 4, "magic");
  if (std::memcmp(bytes.data(), "HYPC", 4) != 0) {
    throw ParseError(ParseError::Kind::kBadMagic, 0, "expected \"HYPC\"");
  }
  need(bytes, kHeaderSize, "header");
  const auto version = load<std::uint16_t>(bytes, 4);
  if (version != kHypcVersion) {
    throw ParseError(ParseError::Kind::kUnsupportedVersion, 4, "version " + std::to_string(version));
  }
  std::uint64_t dims[4];
  for (int i = 0; i < 4; ++i) dims[i] = load<std::uint32_t>(bytes, 6 + 4 * static_cast<std::uint64_t>(i));
  for (int i = 0; i < 4; ++i) {
    if (dims[i] == 0) throw ParseError(ParseError::Kind::kInvalidDims, 6 + 4 * static_cast<std::uint64_t>(i), "zero dim");
  }
  const std::uint64_t B = dims[0], C = dims[1], H = dims[2], W = dims[3];

  // 128-bit size arithmetic.
  const unsigned __int128 values = static_cast<unsigned __int128>(B) * C * H * W;
  const unsigned __int128 label_count = static_cast<unsigned __int128>(B) * H * W;
  const unsigned __int128 wl_end = kHeaderSize + static_cast<unsigned __int128>(C) * 8;
  const unsigned __int128 payload_end = wl_end + values * 4;
  const unsigned __int128 label_end = payload_end + kLabelHeaderSize + label_count * 2;
  const auto size = static_cast<unsigned __int128>(bytes.size());
  if (size < payload_end) {
    throw ParseError(ParseError::Kind::kTruncated, bytes.size(),
                     "dims require " + std::to_string(static_cast<std::uint64_t>(
                                           payload_end > ~std::uint64_t{0} ? ~std::uint64_t{0} : payload_end)) +
                         " bytes, file has " + std::to_string(bytes.size()));
  }

  VectorXd wavelengths(static_cast<Index>(C));
  for (std::uint64_t c = 0; c < C; ++c) {
    const std::uint64_t at = kHeaderSize + 8 * c;
    const auto w = load<double>(bytes, at);
    if (!std::isfinite(w)) throw ParseError(ParseError::Kind::kNonFiniteValue, at, "wavelength " + std::to_string(c));
    if (c > 0 && !(w > wavelengths[static_cast<Index>(c - 1)])) {
      throw ParseError(ParseError::Kind::kNonIncreasingWavelengths, at,
                       "wavelength " + std::to_string(c) + " is not above its predecessor");
    }
    wavelengths[static_cast<Index>(c)] = w;
  }

  const auto n_values = static_cast<std::uint64_t>(values);
  const auto wl_stop = static_cast<std::uint64_t>(wl_end);
  VectorXd data(static_cast<Index>(n_values));
  for (std::uint64_t i = 0; i < n_values; ++i) {
    const std::uint64_t at = wl_stop + 4 * i;
    const auto v = load<float>(bytes, at);
    if (!std::isfinite(v)) throw ParseError(ParseError::Kind::kNonFiniteValue, at, "reflectance " + std::to_string(i));
    data[static_cast<Index>(i)] = static_cast<double>(v);
  }

  CubeFile out;
  const CubeDims cube_dims{static_cast<Index>(B), static_cast<Index>(C), static_cast<Index>(H), static_cast<Index>(W)};
  out.cube = Cube(cube_dims, std::move(wavelengths), std::move(data));

  const auto payload_stop = static_cast<std::uint64_t>(payload_end);
  if (size == payload_end) return out;

  need(bytes, payload_stop + 4, "label magic");
  if (std::memcmp(bytes.data() + payload_stop, "LBLS", 4) != 0) {
    throw ParseError(ParseError::Kind::kBadLabelMagic, payload_stop, "expected \"LBLS\" or end of file");
  }
  need(bytes, payload_stop + kLabelHeaderSize, "label header");
  LabelMap labels;
  labels.batch = cube_dims.batch;
  labels.height = cube_dims.height;
  labels.width = cube_dims.width;
  labels.num_classes = load<std::uint16_t>(bytes, payload_stop + 4);
  labels.ignore = load<std::uint16_t>(bytes, payload_stop + 6);
  if (size < label_end) {
    throw ParseError(ParseError::Kind::kTruncated, bytes.size(),
                     "label block requires " + std::to_string(static_cast<std::uint64_t>(label_end)) +
                         " bytes, file has " + std::to_string(bytes.size()));
  }
  if (size > label_end) {
    throw ParseError(ParseError::Kind::kTrailingBytes, static_cast<std::uint64_t>(label_end),
                     std::to_string(bytes.size() - static_cast<std::uint64_t>(label_end)) + " unexpected bytes");
  }
  const auto n_labels = static_cast<std::uint64_t>(label_count);
  labels.values.resize(n_labels);
  for (std::uint64_t i = 0; i < n_labels; ++i) {
    const std::uint64_t at = payload_stop + kLabelHeaderSize + 2 * i;
    const auto v = load<std::uint16_t>(bytes, at);
    if (v != labels.ignore && v >= labels.num_classes) {
      throw ParseError(ParseError::Kind::kLabelOutOfRange, at,
                       "label " + std::to_string(v) + " with K=" + std::to_string(labels.num_classes));
    }
    labels.values[i] = v;
  }
  out.labels = std::move(labels);
  return out;
}

std::vector<std::uint8_t> serialize_cube(const Cube& cube, const LabelMap* labels) {
  cube.validate();
  const CubeDims& d = cube.dims();
  const auto fits_u32 = [](Index v) { return v > 0 && v <= static_cast<Index>(0xFFFFFFFFu); };
  if (!fits_u32(d.batch) || !fits_u32(d.channels) || !fits_u32(d.height) || !fits_u32(d.width)) {
    throw DimensionError("cube dims must be in [1, 2^32)");
  }
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(kHeaderSize + 8 * d.channels + 4 * d.size()));
  out.insert(out.end(), {'H', 'Y', 'P', 'C'});
  store<std::uint16_t>(out, kHypcVersion);
  for (Index v : {d.batch, d.channels, d.height, d.width}) store<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  for (Index c = 0; c < d.channels; ++c) store<double>(out, cube.wavelengths()[c]);
  for (Index i = 0; i < d.size(); ++i) {
    const auto v = static_cast<float>(cube.data()[i]);
    if (!std::isfinite(v)) throw DataError("reflectance overflows float32 at index " + std::to_string(i));
    store<float>(out, v);
  }
  if (labels) {
    labels->validate();
    if (labels->batch != d.batch || labels->height != d.height || labels->width != d.width) {
      throw DimensionError("label map dims do not match the cube");
    }
    out.insert(out.end(), {'L', 'B', 'L', 'S'});
    store<std::uint16_t>(out, labels->num_classes);
    store<std::uint16_t>(out, labels->ignore);
    for (auto v : labels->values) store<std::uint16_t>(out, v);
  }
  return out;
}

CubeFile read_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kIo, 0, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_cube(bytes);
}

void write_cube(const std::filesystem::path& path, const Cube& cube, const LabelMap* labels) {
  const auto bytes = serialize_cube(cube, labels);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(ParseError::Kind::kIo, 0, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError(ParseError::Kind::kIo, 0, "short write to " + path.string());
}

}  // namespace lqe
