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

// Spectral integration Y[b,f,:] = sum_c Q[f,c] X[b,c,:] and its reverse-mode
// gradients, closed form.

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/filter_bank.hpp"
#include "lqe/hypercube.hpp"
#include "lqe/parallel.hpp"

namespace lqe {

namespace detail {

/// Pixel blocks of a tensor: (image, first pixel, row count).
struct PixelBlock {
  Index image;
  Index first;
  Index rows;
};

inline std::vector<PixelBlock> pixel_blocks(const CubeDims& dims) {
  std::vector<PixelBlock> blocks;
  for (Index b = 0; b < dims.batch; ++b) {
    for (Index first = 0; first < dims.pixels(); first += kPixelBlock) {
      blocks.push_back({b, first, std::min(kPixelBlock, dims.pixels() - first)});
    }
  }
  return blocks;
}

}  // namespace detail

template <typename Scalar>
ReducedCube<Scalar> apply_filter_bank(const Tensor4<Scalar>& cube, const Eigen::Ref<const MatrixX<Scalar>>& weights,
                                      int threads = 1) {
  const CubeDims& in = cube.dims();
  if (weights.cols() != in.channels) {
    throw DimensionError("filter weights have " + std::to_string(weights.cols()) + " channels, cube has " +
                         std::to_string(in.channels));
  }
  ReducedCube<Scalar> out(CubeDims{in.batch, weights.rows(), in.height, in.width});
  const auto blocks = detail::pixel_blocks(in);
  parallel_for(static_cast<Index>(blocks.size()), threads, [&](Index i) {
    const auto& blk = blocks[static_cast<std::size_t>(i)];
    out.image(blk.image).middleRows(blk.first, blk.rows).noalias() =
        cube.image(blk.image).middleRows(blk.first, blk.rows) * weights.transpose();
  });
  return out;
}

template <typename Scalar>
ReducedCube<Scalar> apply_filter_bank(const Tensor4<Scalar>& cube, const FilterResponse<Scalar>& response,
                                      int threads = 1) {
  return apply_filter_bank<Scalar>(cube, response.weights, threads);
}

/// dL/dQ = sum over (b, h, w) of upstream[b,f,.] X[b,c,.], formed per pixel
/// block and combined with a fixed pairwise tree.
template <typename Scalar>
MatrixX<Scalar> weight_gradient(const Tensor4<Scalar>& cube, const Tensor4<Scalar>& upstream, int threads = 1) {
  const CubeDims& in = cube.dims();
  const CubeDims& up = upstream.dims();
  if (up.batch != in.batch || up.height != in.height || up.width != in.width) {
    throw DimensionError("upstream gradient dims do not match the cube");
  }
  const auto blocks = detail::pixel_blocks(in);
  std::vector<MatrixX<Scalar>> partials(blocks.size());
  parallel_for(static_cast<Index>(blocks.size()), threads, [&](Index i) {
    const auto& blk = blocks[static_cast<std::size_t>(i)];
    partials[static_cast<std::size_t>(i)].noalias() =
        upstream.image(blk.image).middleRows(blk.first, blk.rows).transpose() *
        cube.image(blk.image).middleRows(blk.first, blk.rows);
  });
  if (partials.empty()) return MatrixX<Scalar>::Zero(up.channels, in.channels);
  return pairwise_sum(std::move(partials));
}

/// Chains dL/dQ (F x C) back to the raw peak parameters.
///
/// The normalizer max_c S[f,c] is differentiated through the first channel
/// attaining it.
template <typename Scalar>
ParamGradients<Scalar> backprop_weights(const FilterResponse<Scalar>& cached,
                                        const Eigen::Ref<const MatrixX<Scalar>>& weight_grad) {
  const Index F = cached.num_filters();
  const Index P = cached.peaks_per_filter();
  const Index C = cached.num_channels();
  if (weight_grad.rows() != F || weight_grad.cols() != C) {
    throw DimensionError("weight gradient must be " + std::to_string(F) + " x " + std::to_string(C));
  }
  auto grads = ParamGradients<Scalar>::zeros(F, P);

  for (Index f = 0; f < F; ++f) {
    const Scalar denom = cached.row_max[f] + Scalar(kEpsilon);
    // Q = S / (m + eps)  =>  dL/dS_c = G_c / (m + eps), plus the max channel
    // collects -sum_c G_c S_c / (m + eps)^2.
    VectorX<Scalar> grad_sum = weight_grad.row(f).transpose() / denom;
    const Scalar through_max = -(weight_grad.row(f).dot(cached.weights.row(f))) / denom;
    grad_sum[cached.row_argmax[f]] += through_max;

    for (Index p = 0; p < P; ++p) {
      const Scalar beta = cached.bandwidth(f, p);
      const Scalar a = cached.amplitude(f, p);
      const Scalar s = cached.skew(f, p);
      const Scalar c0 = cached.centroid(f, p);
      Scalar d_centroid = 0, d_logbw = 0, d_logit = 0, d_skewraw = 0;
      for (Index c = 0; c < C; ++c) {
        const Scalar upstream = grad_sum[c];
        const Scalar g = cached.per_peak(f * P + p, c);
        if (upstream == Scalar(0) || g == Scalar(0)) continue;
        const Scalar x = (cached.normalized_wavelengths[c] - c0) / beta;
        const Scalar th = std::tanh(x);
        const Scalar x_skew = x * (Scalar(1) + s * th);
        // g = a exp(-x_skew^2/2)
        const Scalar dg_dxskew = -g * x_skew;
        const Scalar dxskew_dx = Scalar(1) + s * th + s * x * (Scalar(1) - th * th);
        const Scalar dg_dx = dg_dxskew * dxskew_dx;
        d_centroid += upstream * dg_dx * (Scalar(-1) / beta);
        d_logbw += upstream * dg_dx * (-x);
        d_logit += upstream * g * (Scalar(1) - a);
        d_skewraw += upstream * dg_dxskew * x * th;
      }
      const Scalar tg = std::tanh(cached.skewness_raw(f, p));
      grads.centroid(f, p) = d_centroid;
      grads.log_bandwidth(f, p) = d_logbw;
      grads.amplitude_logit(f, p) = d_logit;
      grads.skewness(f, p) = d_skewraw * Scalar(0.5) * (Scalar(1) - tg * tg);
    }
  }
  return grads;
}

template <typename Scalar>
struct BackwardResult {
  ParamGradients<Scalar> params;
  MatrixX<Scalar> weight_grad;  // dL/dQ, F x C
  std::optional<Tensor4<Scalar>> input_grad;
};

/// Reverse pass of apply_filter_bank. `upstream` is dL/dY with dims
/// B x F x H x W. dL/dX is only formed when requested.
template <typename Scalar>
BackwardResult<Scalar> backward(const Tensor4<Scalar>& cube, const FilterResponse<Scalar>& cached,
                                const Tensor4<Scalar>& upstream, bool want_input_grad = false, int threads = 1) {
  if (cached.num_channels() != cube.dims().channels) {
    throw DimensionError("cached filter response has " + std::to_string(cached.num_channels()) +
                         " channels, cube has " + std::to_string(cube.dims().channels));
  }
  if (upstream.dims().channels != cached.num_filters()) {
    throw DimensionError("upstream gradient has " + std::to_string(upstream.dims().channels) + " filters, expected " +
                         std::to_string(cached.num_filters()));
  }
  BackwardResult<Scalar> out;
  out.weight_grad = weight_gradient(cube, upstream, threads);
  out.params = backprop_weights<Scalar>(cached, out.weight_grad);
  if (want_input_grad) {
    // dL/dX[b,:,c] = sum_f upstream[b,f,:] Q[f,c]; same math as a forward pass
    // with the transposed weights.
    out.input_grad = apply_filter_bank<Scalar>(upstream, cached.weights.transpose(), threads);
  }
  return out;
}

}  // namespace lqe
