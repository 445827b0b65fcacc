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

#include "lqe/seg_loss.hpp"

#include <cmath>
#include <string>

namespace lqe {

MatrixXd softmax_rows(const MatrixXd& logits) {
  MatrixXd p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - top).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

SegLossResult seg_loss(const MatrixXd& logits, std::span<const std::uint16_t> labels, const VectorXd& class_weights,
                       std::uint16_t ignore) {
  const Index N = logits.rows();
  const Index K = logits.cols();
  if (static_cast<Index>(labels.size()) != N) throw DimensionError("labels do not match logit rows");
  if (class_weights.size() != K) throw DimensionError("class weight vector length must equal K");
  if ((class_weights.array() < 0.0).any()) throw ConfigError("class weights must be non-negative");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != ignore && labels[i] >= K) {
      throw DataError("label " + std::to_string(labels[i]) + " at pixel " + std::to_string(i) + " outside [0, " +
                      std::to_string(K) + ")");
    }
  }

  SegLossResult out;
  out.grad = MatrixXd::Zero(N, K);
  const MatrixXd prob = softmax_rows(logits);

  double weight_sum = 0.0;
  for (Index i = 0; i < N; ++i) {
    if (labels[static_cast<std::size_t>(i)] != ignore) weight_sum += class_weights[labels[static_cast<std::size_t>(i)]];
  }

  // Dice statistics per class.
  VectorXd inter = VectorXd::Zero(K), prob_sum = VectorXd::Zero(K), target_sum = VectorXd::Zero(K);
  for (Index i = 0; i < N; ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    if (y == ignore) continue;
    prob_sum += prob.row(i).transpose();
    inter[y] += prob(i, y);
    target_sum[y] += 1.0;
  }
  const double s = kDiceSmoothing;
  VectorXd numer = 2.0 * inter.array() + s;
  VectorXd denom = prob_sum.array() + target_sum.array() + s;
  out.dice = 1.0 - (numer.array() / denom.array()).mean();

  // dDice/dp_ik = -(1/K) (2 g_ik D_k - N_k) / D_k^2
  const VectorXd dice_base = (numer.array() / (denom.array() * denom.array()) / double(K)).matrix();
  const VectorXd dice_hit = (-2.0 / (denom.array() * double(K))).matrix();

  double ce = 0.0;
  for (Index i = 0; i < N; ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    if (y == ignore) continue;
    const double w = weight_sum > 0.0 ? class_weights[y] / weight_sum : 0.0;
    const double top = logits.row(i).maxCoeff();
    const double log_norm = top + std::log((logits.row(i).array() - top).exp().sum());
    ce -= w * (logits(i, y) - log_norm);

    // Cross entropy on logits directly: w (p - onehot).
    out.grad.row(i) = w * prob.row(i);
    out.grad(i, y) -= w;

    // Dice through the softmax Jacobian.
    Eigen::RowVectorXd dp = dice_base.transpose();
    dp[y] += dice_hit[y];
    const double inner = dp.dot(prob.row(i));
    out.grad.row(i).array() += prob.row(i).array() * (dp.array() - inner);
  }
  out.cross_entropy = ce;
  out.value = out.cross_entropy + out.dice;
  return out;
}

VectorXd inverse_frequency_weights(std::span<const std::uint16_t> labels, Index num_classes, std::uint16_t ignore) {
  VectorXd counts = VectorXd::Zero(num_classes);
  for (auto y : labels) {
    if (y == ignore) continue;
    if (y >= num_classes) throw DataError("label outside [0, K) while computing class weights");
    counts[y] += 1.0;
  }
  VectorXd w = VectorXd::Zero(num_classes);
  int present = 0;
  for (Index k = 0; k < num_classes; ++k) {
    if (counts[k] > 0.0) {
      w[k] = 1.0 / counts[k];
      ++present;
    }
  }
  if (present == 0) throw DataError("no labeled pixels to derive class weights from");
  w *= present / w.sum();
  return w;
}

}  // namespace lqe
