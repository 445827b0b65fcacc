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

#include "lqe/common.hpp"

namespace lqe {

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  VectorXd first_moment;
  VectorXd second_moment;
  std::int64_t step = 0;

  static AdamState zeros(Index n) { return {VectorXd::Zero(n), VectorXd::Zero(n), 0}; }
};

/// One AdamW update in place:
///   p <- p (1 - lr wd)
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void adam_step(VectorXd& params, const VectorXd& grads, AdamState& state, const AdamHyper& hyper);

}  // namespace lqe
