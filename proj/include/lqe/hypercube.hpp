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

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "lqe/common.hpp"

namespace lqe {

struct CubeDims {
  Index batch = 0;
  Index channels = 0;
  Index height = 0;
  Index width = 0;

  Index pixels() const { return height * width; }
  Index size() const { return batch * channels * height * width; }
  friend bool operator==(const CubeDims&, const CubeDims&) = default;
};

/// Dense B x C x H x W tensor stored contiguously in B, C, H, W order.
///
/// Image b is exposed as a column-major (H*W) x C matrix: element (pixel, c)
/// lives at b*C*H*W + c*H*W + pixel, which is exactly the storage order.
template <typename Scalar>
class Tensor4 {
 public:
  using Matrix = MatrixX<Scalar>;
  using MapType = Eigen::Map<Matrix>;
  using ConstMapType = Eigen::Map<const Matrix>;

  Tensor4() = default;
  explicit Tensor4(CubeDims dims) : dims_(dims), data_(VectorX<Scalar>::Zero(dims.size())) {}
  Tensor4(CubeDims dims, VectorX<Scalar> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_.size()) {
      throw DimensionError("tensor data has " + std::to_string(data_.size()) + " values, dims require " +
                           std::to_string(dims_.size()));
    }
  }

  const CubeDims& dims() const { return dims_; }
  VectorX<Scalar>& data() { return data_; }
  const VectorX<Scalar>& data() const { return data_; }

  MapType image(Index b) { return MapType(data_.data() + b * image_size(), dims_.pixels(), dims_.channels); }
  ConstMapType image(Index b) const {
    return ConstMapType(data_.data() + b * image_size(), dims_.pixels(), dims_.channels);
  }

  Scalar& operator()(Index b, Index c, Index h, Index w) { return data_[offset(b, c, h, w)]; }
  Scalar operator()(Index b, Index c, Index h, Index w) const { return data_[offset(b, c, h, w)]; }

  Index image_size() const { return dims_.channels * dims_.pixels(); }
  Index offset(Index b, Index c, Index h, Index w) const {
    return ((b * dims_.channels + c) * dims_.height + h) * dims_.width + w;
  }

 private:
  CubeDims dims_;
  VectorX<Scalar> data_;
};

/// Reflectance hypercube with per-channel wavelengths in nm.
template <typename Scalar>
class Hypercube : public Tensor4<Scalar> {
 public:
  Hypercube() = default;
  Hypercube(CubeDims dims, VectorX<Scalar> wavelengths_nm)
      : Tensor4<Scalar>(dims), wavelengths_(std::move(wavelengths_nm)) {
    validate_wavelengths();
  }
  Hypercube(CubeDims dims, VectorX<Scalar> wavelengths_nm, VectorX<Scalar> data)
      : Tensor4<Scalar>(dims, std::move(data)), wavelengths_(std::move(wavelengths_nm)) {
    validate_wavelengths();
  }

  const VectorX<Scalar>& wavelengths() const { return wavelengths_; }

  /// Checks every invariant, including finiteness of the payload.
  void validate() const {
    validate_wavelengths();
    if (!this->data().allFinite()) throw DataError("hypercube contains non-finite values");
  }

 private:
  void validate_wavelengths() const {
    if (wavelengths_.size() != this->dims().channels) {
      throw DimensionError("hypercube has " + std::to_string(this->dims().channels) + " channels but " +
                           std::to_string(wavelengths_.size()) + " wavelengths");
    }
    for (Index c = 1; c < wavelengths_.size(); ++c) {
      if (!(wavelengths_[c] > wavelengths_[c - 1])) {
        throw DataError("wavelengths must be strictly increasing (channel " + std::to_string(c) + ")");
      }
    }
  }

  VectorX<Scalar> wavelengths_;
};

/// B x F x H x W output of a spectral reduction.
template <typename Scalar>
using ReducedCube = Tensor4<Scalar>;

using Cube = Hypercube<double>;

/// Per-pixel class ids in B, H, W order.
struct LabelMap {
  Index batch = 0;
  Index height = 0;
  Index width = 0;
  std::uint16_t num_classes = 0;
  std::uint16_t ignore = kIgnoreLabel;
  std::vector<std::uint16_t> values;

  Index pixels_per_image() const { return height * width; }
  Index size() const { return batch * height * width; }

  /// Checks the size and that every value is a class id or the ignore value.
  void validate() const {
    if (static_cast<Index>(values.size()) != size()) throw DimensionError("label map size does not match dims");
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto v = values[i];
      if (v != ignore && v >= num_classes) {
        throw DataError("label " + std::to_string(v) + " at index " + std::to_string(i) + " outside [0, " +
                        std::to_string(num_classes) + ")");
      }
    }
  }
};

struct LabeledCube {
  Cube cube;
  LabelMap labels;

  void validate() const {
    cube.validate();
    labels.validate();
    const auto& d = cube.dims();
    if (labels.batch != d.batch || labels.height != d.height || labels.width != d.width) {
      throw DimensionError("label map dims do not match the hypercube");
    }
  }
};

}  // namespace lqe
