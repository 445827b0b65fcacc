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

#include "lqe/optimizer.hpp"

#include <cmath>

namespace lqe {

void adam_step(VectorXd& params, const VectorXd& grads, AdamState& state, const AdamHyper& hyper) {
  const Index n = params.size();
  if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw DimensionError("adam_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(hyper.beta1, t);
  const double bias2 = 1.0 - std::pow(hyper.beta2, t);

  if (hyper.weight_decay != 0.0) params *= (1.0 - hyper.learning_rate * hyper.weight_decay);
  state.first_moment = hyper.beta1 * state.first_moment + (1.0 - hyper.beta1) * grads;
  state.second_moment = hyper.beta2 * state.second_moment + (1.0 - hyper.beta2) * grads.cwiseAbs2();
  const auto m_hat = state.first_moment.array() / bias1;
  const auto v_hat = state.second_moment.array() / bias2;
  params.array() -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.eps);
}

}  // namespace lqe
