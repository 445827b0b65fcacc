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

// Per-pixel segmentation heads consuming the reduced F-channel features.

#include <cstdint>
#include <memory>
#include <string>

#include "lqe/common.hpp"

namespace lqe {

/// Linear softmax head: logits = features * weight^T + bias.
struct SegHeadParams {
  MatrixXd weight;  // K x F
  VectorXd bias;    // K
};

/// Activations a head keeps between forward and backward.
struct HeadCache {
  MatrixXd input;
  MatrixXd hidden;  // post-activation, MLP only
};

enum class HeadKind { kLinear, kMlp };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

class SegHead {
 public:
  virtual ~SegHead() = default;

  virtual HeadKind kind() const = 0;
  virtual Index num_features() const = 0;
  virtual Index num_classes() const = 0;

  virtual VectorXd parameters() const = 0;
  virtual void set_parameters(const VectorXd& flat) = 0;

  /// features: N x F. Returns N x K logits.
  virtual MatrixXd forward(const MatrixXd& features, HeadCache* cache) const = 0;

  /// Returns dL/dfeatures and writes dL/dparameters (flat, same layout as
  /// parameters()).
  virtual MatrixXd backward(const HeadCache& cache, const MatrixXd& grad_logits, VectorXd* param_grad) const = 0;

  virtual std::unique_ptr<SegHead> clone() const = 0;
};

class LinearHead final : public SegHead {
 public:
  LinearHead(Index num_features, Index num_classes, std::uint64_t seed);
  explicit LinearHead(SegHeadParams params);

  HeadKind kind() const override { return HeadKind::kLinear; }
  Index num_features() const override { return params_.weight.cols(); }
  Index num_classes() const override { return params_.weight.rows(); }
  VectorXd parameters() const override;
  void set_parameters(const VectorXd& flat) override;
  MatrixXd forward(const MatrixXd& features, HeadCache* cache) const override;
  MatrixXd backward(const HeadCache& cache, const MatrixXd& grad_logits, VectorXd* param_grad) const override;
  std::unique_ptr<SegHead> clone() const override { return std::make_unique<LinearHead>(*this); }

  const SegHeadParams& params() const { return params_; }

 private:
  SegHeadParams params_;
};

/// One tanh hidden layer: logits = tanh(x W1^T + b1) W2^T + b2.
class MlpHead final : public SegHead {
 public:
  MlpHead(Index num_features, Index hidden, Index num_classes, std::uint64_t seed);

  HeadKind kind() const override { return HeadKind::kMlp; }
  Index num_features() const override { return w1_.cols(); }
  Index num_classes() const override { return w2_.rows(); }
  Index hidden_width() const { return w1_.rows(); }
  VectorXd parameters() const override;
  void set_parameters(const VectorXd& flat) override;
  MatrixXd forward(const MatrixXd& features, HeadCache* cache) const override;
  MatrixXd backward(const HeadCache& cache, const MatrixXd& grad_logits, VectorXd* param_grad) const override;
  std::unique_ptr<SegHead> clone() const override { return std::make_unique<MlpHead>(*this); }

 private:
  MatrixXd w1_;  // H x F
  VectorXd b1_;
  MatrixXd w2_;  // K x H
  VectorXd b2_;
};

std::unique_ptr<SegHead> make_head(HeadKind kind, Index num_features, Index num_classes, Index hidden,
                                   std::uint64_t seed);

}  // namespace lqe
