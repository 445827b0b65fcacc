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
#include <string>
#include <vector>

#include "lqe/common.hpp"

namespace lqe {

/// K x K pixel counts; rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(Index num_classes) : counts_(MatrixXi64::Zero(num_classes, num_classes)) {}

  Index num_classes() const { return counts_.rows(); }
  const MatrixXi64& counts() const { return counts_; }
  std::int64_t total() const { return counts_.sum(); }

  /// Adds one count per pixel whose label is not `ignore`. Throws DataError on
  /// class ids outside [0, K).
  void accumulate(std::span<const std::uint16_t> predictions, std::span<const std::uint16_t> labels,
                  std::uint16_t ignore = kIgnoreLabel);

  void add(Index truth, Index predicted, std::int64_t count = 1);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  static ConfusionMatrix from_counts(MatrixXi64 counts);

 private:
  MatrixXi64 counts_;
};

/// All percentages, kappa scaled by 100. Classes absent from the ground truth
/// have NaN per-class entries and are left out of the means.
struct SegMetrics {
  VectorXd per_class_iou;
  VectorXd per_class_f1;
  VectorXd per_class_specificity;
  std::vector<bool> present;
  double miou = 0.0;
  double mf1 = 0.0;
  double kappa = 0.0;
  double accuracy = 0.0;
  double specificity = 0.0;
};

SegMetrics compute_metrics(const ConfusionMatrix& cm);

/// Fixed-width text table, values to two decimals.
std::string format_metrics_table(const SegMetrics& m);

}  // namespace lqe
