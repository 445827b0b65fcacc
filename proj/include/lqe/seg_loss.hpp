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

#include <cstdint>
#include <span>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/regularization.hpp"

namespace lqe {

inline constexpr double kDiceSmoothing = 1.0;

struct SegLossResult {
  double value = 0.0;
  double cross_entropy = 0.0;
  double dice = 0.0;
  MatrixXd grad;  // same shape as the logits
};

/// Class-weighted cross entropy plus soft Dice.
///
/// `logits` is pixel-major: row i holds the K class scores of pixel i, pixels
/// in (b, h, w) order. Cross entropy is the weight-normalized mean over
/// non-ignored pixels, sum_i w_{y_i} (-log p_{i,y_i}) / sum_i w_{y_i}. Dice is
/// 1 - mean_k (2 sum p g + s) / (sum p + sum g + s) over all K classes with
/// s = 1, over non-ignored pixels.
SegLossResult seg_loss(const MatrixXd& logits, std::span<const std::uint16_t> labels, const VectorXd& class_weights,
                       std::uint16_t ignore = kIgnoreLabel);

/// Row-wise softmax, max-shifted.
MatrixXd softmax_rows(const MatrixXd& logits);

/// seg + lambda_reg * reg.total
inline double total_loss(double seg, const RegLosses<double>& reg, double lambda_reg) {
  if (!(lambda_reg >= 0.0)) throw ConfigError("lambda_reg must be >= 0");
  return seg + lambda_reg * reg.total;
}

/// Inverse class frequency over non-ignored labels, normalized to mean 1 over
/// classes that occur. Absent classes get weight 0.
VectorXd inverse_frequency_weights(std::span<const std::uint16_t> labels, Index num_classes,
                                   std::uint16_t ignore = kIgnoreLabel);

}  // namespace lqe
