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

#include "lqe/heads.hpp"

#include <cmath>

#include "lqe/rng.hpp"

namespace lqe {

namespace {

// Random stream for head initialization.
constexpr std::uint64_t kHeadStream = 0x4845414400000000ULL;

MatrixXd random_matrix(Index rows, Index cols, double stddev, Rng& rng) {
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, stddev);
  }
  return m;
}

void check_features(const MatrixXd& features, Index expected) {
  if (features.cols() != expected) {
    throw DimensionError("head expects " + std::to_string(expected) + " features, got " +
                         std::to_string(features.cols()));
  }
}

}  // namespace

std::string to_string(HeadKind kind) { return kind == HeadKind::kLinear ? "linear" : "mlp"; }

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "linear") return HeadKind::kLinear;
  if (name == "mlp") return HeadKind::kMlp;
  throw ConfigError("unknown head kind '" + name + "' (expected linear or mlp)");
}

LinearHead::LinearHead(Index num_features, Index num_classes, std::uint64_t seed) {
  if (num_features < 1 || num_classes < 2) throw ConfigError("linear head needs F >= 1 and K >= 2");
  Rng rng(seed, kHeadStream);
  params_.weight = random_matrix(num_classes, num_features, 0.1, rng);
  params_.bias = VectorXd::Zero(num_classes);
}

LinearHead::LinearHead(SegHeadParams params) : params_(std::move(params)) {
  if (params_.bias.size() != params_.weight.rows()) throw DimensionError("head bias must have K entries");
}

VectorXd LinearHead::parameters() const {
  VectorXd flat(params_.weight.size() + params_.bias.size());
  flat << params_.weight.reshaped(), params_.bias;
  return flat;
}

void LinearHead::set_parameters(const VectorXd& flat) {
  const Index nw = params_.weight.size();
  if (flat.size() != nw + params_.bias.size()) throw DimensionError("linear head parameter size mismatch");
  params_.weight.reshaped() = flat.head(nw);
  params_.bias = flat.tail(params_.bias.size());
}

MatrixXd LinearHead::forward(const MatrixXd& features, HeadCache* cache) const {
  check_features(features, num_features());
  MatrixXd logits = features * params_.weight.transpose();
  logits.rowwise() += params_.bias.transpose();
  if (cache) cache->input = features;
  return logits;
}

MatrixXd LinearHead::backward(const HeadCache& cache, const MatrixXd& grad_logits, VectorXd* param_grad) const {
  if (param_grad) {
    const MatrixXd gw = grad_logits.transpose() * cache.input;
    const VectorXd gb = grad_logits.colwise().sum().transpose();
    param_grad->resize(gw.size() + gb.size());
    *param_grad << gw.reshaped(), gb;
  }
  return grad_logits * params_.weight;
}

MlpHead::MlpHead(Index num_features, Index hidden, Index num_classes, std::uint64_t seed) {
  if (num_features < 1 || hidden < 1 || num_classes < 2) throw ConfigError("mlp head needs F, H >= 1 and K >= 2");
  Rng rng(seed, kHeadStream + 1);
  w1_ = random_matrix(hidden, num_features, 1.0 / std::sqrt(double(num_features)), rng);
  b1_ = VectorXd::Zero(hidden);
  w2_ = random_matrix(num_classes, hidden, 1.0 / std::sqrt(double(hidden)), rng);
  b2_ = VectorXd::Zero(num_classes);
}

VectorXd MlpHead::parameters() const {
  VectorXd flat(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  flat << w1_.reshaped(), b1_, w2_.reshaped(), b2_;
  return flat;
}

void MlpHead::set_parameters(const VectorXd& flat) {
  if (flat.size() != w1_.size() + b1_.size() + w2_.size() + b2_.size()) {
    throw DimensionError("mlp head parameter size mismatch");
  }
  Index at = 0;
  w1_.reshaped() = flat.segment(at, w1_.size());
  at += w1_.size();
  b1_ = flat.segment(at, b1_.size());
  at += b1_.size();
  w2_.reshaped() = flat.segment(at, w2_.size());
  at += w2_.size();
  b2_ = flat.segment(at, b2_.size());
}

MatrixXd MlpHead::forward(const MatrixXd& features, HeadCache* cache) const {
  check_features(features, num_features());
  MatrixXd hidden = features * w1_.transpose();
  hidden.rowwise() += b1_.transpose();
  hidden = hidden.array().tanh().matrix();
  MatrixXd logits = hidden * w2_.transpose();
  logits.rowwise() += b2_.transpose();
  if (cache) {
    cache->input = features;
    cache->hidden = std::move(hidden);
  }
  return logits;
}

MatrixXd MlpHead::backward(const HeadCache& cache, const MatrixXd& grad_logits, VectorXd* param_grad) const {
  const MatrixXd grad_hidden = grad_logits * w2_;
  const MatrixXd grad_pre = (grad_hidden.array() * (1.0 - cache.hidden.array().square())).matrix();
  if (param_grad) {
    const MatrixXd gw1 = grad_pre.transpose() * cache.input;
    const VectorXd gb1 = grad_pre.colwise().sum().transpose();
    const MatrixXd gw2 = grad_logits.transpose() * cache.hidden;
    const VectorXd gb2 = grad_logits.colwise().sum().transpose();
    param_grad->resize(gw1.size() + gb1.size() + gw2.size() + gb2.size());
    *param_grad << gw1.reshaped(), gb1, gw2.reshaped(), gb2;
  }
  return grad_pre * w1_;
}

std::unique_ptr<SegHead> make_head(HeadKind kind, Index num_features, Index num_classes, Index hidden,
                                   std::uint64_t seed) {
  if (kind == HeadKind::kLinear) return std::make_unique<LinearHead>(num_features, num_classes, seed);
  return std::make_unique<MlpHead>(num_features, hidden, num_classes, seed);
}

}  // namespace lqe
