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
 Offline baseline reductions: class-balanced pixel sampling, per-band
 standardization, and a fitted linear projection (PCA or NMF) applied to whole
 cubes as

     y = components * (standardize(x) + shift)

 `shift` is zero for PCA. For NMF it is minus the per-band minimum of the
 standardized fitting sample, which makes the fitting data non-negative.
*/

#include <cstdint>
#include <string>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/hypercube.hpp"

namespace lqe {

struct PixelSample {
  MatrixXd matrix;                    // N x C
  std::vector<std::uint16_t> labels;  // N
  std::vector<Index> per_class_counts;
  Index per_class_quota = 0;
};

/// Draws up to floor(target_total / K) pixels per class. Classes with fewer
/// pixels contribute all of them. Each class's draw is split across images in
/// proportion to the image's share of that class (largest remainder), then
/// pixels are picked uniformly without replacement inside each image.
PixelSample stratified_sample(const std::vector<LabeledCube>& cubes, Index target_total, std::uint64_t seed);

struct BandStats {
  VectorXd mean;
  VectorXd std;
};

inline constexpr double kStdFloor = 1e-8;

/// Population mean and standard deviation per band; std floored at 1e-8.
BandStats fit_band_stats(const MatrixXd& samples);
BandStats fit_band_stats(const PixelSample& sample);

Cube apply_band_stats(const Cube& cube, const BandStats& stats);
MatrixXd apply_band_stats(const MatrixXd& samples, const BandStats& stats);

enum class ProjectionKind { kPca, kNmf };

std::string to_string(ProjectionKind kind);
ProjectionKind projection_kind_from_string(const std::string& name);

struct LinearProjection {
  ProjectionKind kind = ProjectionKind::kPca;
  MatrixXd components;          // F x C
  VectorXd shift;               // C
  VectorXd explained_variance;  // PCA only
  int iterations_run = 0;       // NMF only
  double final_residual = 0.0;  // NMF only, Frobenius norm
  std::vector<double> residual_history;  // NMF only, one entry per iteration
};

/// Top-F eigenvectors of the sample covariance (N - 1 denominator), by
/// descending eigenvalue. Each component's largest-magnitude entry is
/// positive.
LinearProjection fit_pca(const MatrixXd& standardized, Index components);

struct NmfOptions {
  int max_iter = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

/// Random non-negative starting factors W (N x F) and H (F x C) for NMF.
/// Entries are uniform in [0, 1) scaled by sqrt(mean(X) / F).
std::pair<MatrixXd, MatrixXd> nmf_initial_factors(const MatrixXd& data, Index components, std::uint64_t seed);

/// Lee-Seung multiplicative updates on the Frobenius residual, H then W each
/// iteration. Stops after max_iter or once the relative residual decrease
/// drops below tol. `data` must be non-negative.
LinearProjection fit_nmf_nonnegative(const MatrixXd& data, Index components, const NmfOptions& options);

/// NMF on standardized data: shifts every band by its minimum first and
/// records the shift.
LinearProjection fit_nmf(const MatrixXd& standardized, Index components, const NmfOptions& options);

/// Standardize, shift and project every pixel. Output is B x F x H x W.
ReducedCube<double> project(const Cube& cube, const BandStats& stats, const LinearProjection& projection,
                            int threads = 1);

/// Fitted stats and projection, stored together.
struct ClassicalPipeline {
  BandStats stats;
  LinearProjection projection;
};

}  // namespace lqe
