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
#include <stdexcept>
#include <string>

namespace lqe {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;
using MatrixXi64 = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Guard added to the normalization denominator of every filter response.
inline constexpr double kEpsilon = 1e-8;

/// Label value excluded from losses and metrics.
inline constexpr std::uint16_t kIgnoreLabel = 65535;

// Error taxonomy. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sizes, counts or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a contract (labels out of range, empty sample, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Shapes of two operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A wavelength lies outside the configured range.
class RangeError : public DataError {
 public:
  RangeError(const std::string& what, Index channel) : DataError(what), channel_(channel) {}
  Index channel() const { return channel_; }

 private:
  Index channel_;
};

/// Loss became NaN or infinite during training.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace lqe
