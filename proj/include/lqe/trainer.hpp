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
 End-to-end training of a filter bank together with a per-pixel head.

 One epoch visits every training image once, in a seeded shuffled order, in
 batches of `batch_size` images. The objective per batch is

     seg_loss(head(apply(filters, X)), labels) + lambda_reg * L_reg(filters)

 Gradients of `accumulate` consecutive batches are averaged before one AdamW
 step. After each epoch the validation mIoU is measured; an epoch counts as an
 improvement when its val mIoU is higher than the best so far, or equal with a
 lower validation segmentation loss. Training stops once `patience` epochs in
 a row bring no improvement, and the best epoch's parameters are returned.
*/

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lqe/filter_bank.hpp"
#include "lqe/heads.hpp"
#include "lqe/hypercube.hpp"
#include "lqe/regularization.hpp"
#include "lqe/seg_loss.hpp"

namespace lqe {

struct TrainConfig {
  double learning_rate = 1e-4;
  int max_epochs = 300;
  int patience = 30;
  int batch_size = 16;
  int accumulate = 1;
  std::uint64_t seed = 42;
  RegConfig reg;
  /// Empty: inverse class frequency on the training split, mean 1.
  std::optional<VectorXd> class_weights;
  double filter_weight_decay = 0.0;
  double head_weight_decay = 1e-2;
  HeadKind head = HeadKind::kLinear;
  int hidden_width = 8;
  /// Worker threads for the pixel-parallel passes. Results do not depend on
  /// it; `deterministic` forces 1 anyway.
  int threads = 1;
  bool deterministic = true;

  void validate() const;
  int effective_threads() const { return deterministic ? 1 : (threads < 1 ? 1 : threads); }
};

struct EpochRecord {
  int epoch = 0;
  double seg_loss = 0.0;
  RegLosses<double> reg;
  double train_miou = 0.0;
  double val_miou = 0.0;
  double val_loss = 0.0;
  /// Centroids outside [0, 1] at the end of the epoch.
  int centroids_out_of_range = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;
  /// Best-epoch filter bank; empty for head-only training.
  std::optional<FilterBankParams<double>> filters;
  HeadKind head_kind = HeadKind::kLinear;
  int hidden_width = 0;
  VectorXd head_parameters;
  VectorXd class_weights;
  /// Filter centroids (F x P) after every epoch.
  std::vector<MatrixXd> centroid_trajectory;

  const EpochRecord& best() const { return epochs.at(static_cast<std::size_t>(best_epoch - 1)); }
};

/// Loss and gradients of the full objective on one batch.
struct ObjectiveResult {
  double seg_loss = 0.0;
  RegLosses<double> reg;
  double total = 0.0;
  ParamGradients<double> filter_grad;
  VectorXd head_grad;
  MatrixXd logits;  // pixel-major, (b, h, w) order
};

ObjectiveResult evaluate_objective(const FilterBankParams<double>& filters, const SegHead& head, const Cube& batch,
                                   std::span<const std::uint16_t> labels, const VectorXd& class_weights,
                                   const RegConfig& reg, int threads = 1);

/// Reduced features of every pixel, pixel-major N x F in (b, h, w) order.
MatrixXd reduce_to_features(const FilterBankParams<double>& filters, const Cube& cube, int threads = 1);

/// Row-wise argmax as class ids.
std::vector<std::uint16_t> predict_labels(const MatrixXd& logits);

TrainReport train(const std::vector<LabeledCube>& train_set, const std::vector<LabeledCube>& val_set, Index filters,
                  Index peaks, const TrainConfig& config,
                  std::optional<WavelengthRange<double>> range = std::nullopt);

/// Pixel features of one image with its labels, for head-only training on a
/// fixed reduction.
struct FeatureImage {
  MatrixXd features;
  std::vector<std::uint16_t> labels;
};

TrainReport train_head(const std::vector<FeatureImage>& train_set, const std::vector<FeatureImage>& val_set,
                       Index num_classes, const TrainConfig& config);

}  // namespace lqe
