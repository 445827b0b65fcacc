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
 Physics-inspired penalties on a filter bank.

   dominance   mean_f ReLU(a_2nd / (a_max + eps) - r_max)
   separation  1/F^2 sum_f sum_{k != f} ReLU(d_min - |c*_f - c*_k|)
   bandwidth   mean_f ReLU(beta_min - beta*_f) + ReLU(beta*_f - beta_max)

 c* and beta* belong to each filter's dominant (largest amplitude) peak. Which
 peak is dominant is treated as locally constant; ReLU'(0) = 0.
*/

#include <cmath>
#include <string>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/filter_bank.hpp"

namespace lqe {

struct RegConfig {
  double r_max = 0.3;
  double d_min = 0.1;
  double beta_min = 0.03;
  double beta_max = 0.25;
  double lambda_reg = 0.1;
  double epsilon = kEpsilon;
  bool use_dominance = true;
  bool use_separation = true;
  bool use_bandwidth = true;

  void validate() const {
    if (!(r_max > 0.0 && r_max < 1.0)) throw ConfigError("r_max must lie in (0, 1)");
    if (!(d_min >= 0.0 && d_min < 1.0)) throw ConfigError("d_min must lie in [0, 1)");
    if (!(beta_min > 0.0 && beta_min < beta_max)) throw ConfigError("need 0 < beta_min < beta_max");
    if (!(lambda_reg >= 0.0)) throw ConfigError("lambda_reg must be >= 0");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  }
};

template <typename Scalar>
struct RegLosses {
  Scalar dominance{};
  Scalar separation{};
  Scalar bandwidth{};
  Scalar total{};
};

/// A penalty value and its gradient with respect to the raw parameters.
template <typename Scalar>
struct RegTerm {
  Scalar value{};
  ParamGradients<Scalar> grad;
};

template <typename Scalar>
RegTerm<Scalar> dominance_loss(const PeakArrays<Scalar>& params, Scalar r_max, Scalar eps = Scalar(kEpsilon)) {
  const Index F = params.num_filters();
  const Index P = params.peaks_per_filter();
  RegTerm<Scalar> out{Scalar(0), ParamGradients<Scalar>::zeros(F, P)};
  if (P < 2 || F == 0) return out;

  for (Index f = 0; f < F; ++f) {
    const Index top = dominant_peak(params, f);
    Index second = top == 0 ? 1 : 0;
    for (Index p = 0; p < P; ++p) {
      if (p != top && params.amplitude_logit(f, p) > params.amplitude_logit(f, second)) second = p;
    }
    const Scalar a_top = sigmoid(params.amplitude_logit(f, top));
    const Scalar a_second = sigmoid(params.amplitude_logit(f, second));
    const Scalar ratio = a_second / (a_top + eps);
    const Scalar excess = ratio - r_max;
    if (excess <= Scalar(0)) continue;
    out.value += excess;
    const Scalar d_second = Scalar(1) / (a_top + eps);
    const Scalar d_top = -a_second / ((a_top + eps) * (a_top + eps));
    out.grad.amplitude_logit(f, second) += d_second * a_second * (Scalar(1) - a_second) / Scalar(F);
    out.grad.amplitude_logit(f, top) += d_top * a_top * (Scalar(1) - a_top) / Scalar(F);
  }
  out.value /= Scalar(F);
  return out;
}

template <typename Scalar>
RegTerm<Scalar> separation_loss(const PeakArrays<Scalar>& params, Scalar d_min) {
  const Index F = params.num_filters();
  const Index P = params.peaks_per_filter();
  RegTerm<Scalar> out{Scalar(0), ParamGradients<Scalar>::zeros(F, P)};
  if (F < 2) return out;

  std::vector<Index> dom(static_cast<std::size_t>(F));
  for (Index f = 0; f < F; ++f) dom[static_cast<std::size_t>(f)] = dominant_peak(params, f);
  const Scalar scale = Scalar(1) / Scalar(F * F);
  for (Index f = 0; f < F; ++f) {
    const Index pf = dom[static_cast<std::size_t>(f)];
    for (Index k = 0; k < F; ++k) {
      if (k == f) continue;
      const Index pk = dom[static_cast<std::size_t>(k)];
      const Scalar diff = params.centroid(f, pf) - params.centroid(k, pk);
      const Scalar gap = d_min - std::abs(diff);
      if (gap <= Scalar(0)) continue;
      out.value += gap;
      const Scalar sign = diff > Scalar(0) ? Scalar(1) : (diff < Scalar(0) ? Scalar(-1) : Scalar(0));
      out.grad.centroid(f, pf) -= sign * scale;
      out.grad.centroid(k, pk) += sign * scale;
    }
  }
  out.value *= scale;
  return out;
}

template <typename Scalar>
RegTerm<Scalar> bandwidth_loss(const PeakArrays<Scalar>& params, Scalar beta_min, Scalar beta_max) {
  const Index F = params.num_filters();
  const Index P = params.peaks_per_filter();
  RegTerm<Scalar> out{Scalar(0), ParamGradients<Scalar>::zeros(F, P)};
  if (F == 0) return out;

  for (Index f = 0; f < F; ++f) {
    const Index p = dominant_peak(params, f);
    const Scalar beta = std::exp(params.log_bandwidth(f, p));
    if (beta_min - beta > Scalar(0)) {
      out.value += beta_min - beta;
      out.grad.log_bandwidth(f, p) -= beta / Scalar(F);
    }
    if (beta - beta_max > Scalar(0)) {
      out.value += beta - beta_max;
      out.grad.log_bandwidth(f, p) += beta / Scalar(F);
    }
  }
  out.value /= Scalar(F);
  return out;
}

template <typename Scalar>
struct RegResult {
  RegLosses<Scalar> losses;
  ParamGradients<Scalar> grad;
};

/// Sum of the enabled penalties (disabled ones report 0). lambda_reg is not
/// applied here.
template <typename Scalar>
RegResult<Scalar> total_reg(const PeakArrays<Scalar>& params, const RegConfig& config) {
  config.validate();
  RegResult<Scalar> out{{}, ParamGradients<Scalar>::zeros(params.num_filters(), params.peaks_per_filter())};
  if (config.use_dominance) {
    auto term = dominance_loss<Scalar>(params, Scalar(config.r_max), Scalar(config.epsilon));
    out.losses.dominance = term.value;
    out.grad += term.grad;
  }
  if (config.use_separation) {
    auto term = separation_loss<Scalar>(params, Scalar(config.d_min));
    out.losses.separation = term.value;
    out.grad += term.grad;
  }
  if (config.use_bandwidth) {
    auto term = bandwidth_loss<Scalar>(params, Scalar(config.beta_min), Scalar(config.beta_max));
    out.losses.bandwidth = term.value;
    out.grad += term.grad;
  }
  out.losses.total = out.losses.dominance + out.losses.separation + out.losses.bandwidth;
  return out;
}

}  // namespace lqe
