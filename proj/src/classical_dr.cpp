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

#include "lqe/classical_dr.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lqe/parallel.hpp"
#include "lqe/rng.hpp"

namespace lqe {

std::string to_string(ProjectionKind kind) { return kind == ProjectionKind::kPca ? "pca" : "nmf"; }

ProjectionKind projection_kind_from_string(const std::string& name) {
  if (name == "pca") return ProjectionKind::kPca;
  if (name == "nmf") return ProjectionKind::kNmf;
  throw ConfigError("unknown projection '" + name + "' (expected pca or nmf)");
}

namespace {

struct ImageRef {
  std::size_t cube;
  Index image;
};

/// Largest-remainder split of `total` proportionally to `weights`; ties in the
/// remainder go to the lower index.
std::vector<Index> proportional_allocation(const std::vector<Index>& weights, Index total) {
  const Index sum = std::accumulate(weights.begin(), weights.end(), Index{0});
  std::vector<Index> alloc(weights.size(), 0);
  if (sum == 0 || total == 0) return alloc;
  std::vector<std::pair<Index, std::size_t>> remainders;  // (remainder numerator, index)
  Index assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    // Exact integer arithmetic: total * w_i / sum.
    const __int128 num = static_cast<__int128>(total) * weights[i];
    alloc[i] = static_cast<Index>(num / sum);
    remainders.emplace_back(static_cast<Index>(num % sum), i);
    assigned += alloc[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (Index r = 0; r < total - assigned; ++r) ++alloc[remainders[static_cast<std::size_t>(r)].second];
  return alloc;
}

}  // namespace

PixelSample stratified_sample(const std::vector<LabeledCube>& cubes, Index target_total, std::uint64_t seed) {
  if (cubes.empty()) throw DataError("stratified_sample needs at least one cube");
  const Index K = cubes.front().labels.num_classes;
  const Index C = cubes.front().cube.dims().channels;
  for (const auto& item : cubes) {
    item.validate();
    if (item.labels.num_classes != K) throw ConfigError("cubes declare different class counts");
    if (item.cube.dims().channels != C) throw DimensionError("cubes have different channel counts");
  }
  if (K < 1 || target_total < K) throw ConfigError("target_total must be at least the number of classes");

  std::vector<ImageRef> images;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    for (Index b = 0; b < cubes[i].cube.dims().batch; ++b) images.push_back({i, b});
  }
  // pixel indices of every class inside every image
  std::vector<std::vector<std::vector<Index>>> where(static_cast<std::size_t>(K),
                                                     std::vector<std::vector<Index>>(images.size()));
  Index labeled = 0;
  for (std::size_t m = 0; m < images.size(); ++m) {
    const LabeledCube& item = cubes[images[m].cube];
    const Index pixels = item.labels.pixels_per_image();
    for (Index p = 0; p < pixels; ++p) {
      const auto y = item.labels.values[static_cast<std::size_t>(images[m].image * pixels + p)];
      if (y == item.labels.ignore) continue;
      where[y][m].push_back(p);
      ++labeled;
    }
  }
  if (labeled == 0) throw DataError("no labeled pixels to sample from");

  PixelSample out;
  out.per_class_quota = target_total / K;
  out.per_class_counts.assign(static_cast<std::size_t>(K), 0);
  std::vector<std::pair<ImageRef, Index>> picks;
  for (Index k = 0; k < K; ++k) {
    std::vector<Index> available(images.size());
    for (std::size_t m = 0; m < images.size(); ++m) available[m] = static_cast<Index>(where[k][m].size());
    const Index total_k = std::accumulate(available.begin(), available.end(), Index{0});
    const Index take = std::min(total_k, out.per_class_quota);
    const auto alloc = proportional_allocation(available, take);
    for (std::size_t m = 0; m < images.size(); ++m) {
      auto pool = where[k][m];
      Rng rng(seed, (static_cast<std::uint64_t>(k) << 32) | static_cast<std::uint64_t>(m));
      // partial Fisher-Yates
      for (Index j = 0; j < alloc[m]; ++j) {
        const auto r = j + static_cast<Index>(rng.below(static_cast<std::uint64_t>(pool.size() - j)));
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(r)]);
        picks.push_back({images[m], pool[static_cast<std::size_t>(j)]});
        out.labels.push_back(static_cast<std::uint16_t>(k));
      }
      out.per_class_counts[static_cast<std::size_t>(k)] += alloc[m];
    }
  }

  out.matrix.resize(static_cast<Index>(picks.size()), C);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const auto& [ref, pixel] = picks[i];
    out.matrix.row(static_cast<Index>(i)) = cubes[ref.cube].cube.image(ref.image).row(pixel);
  }
  return out;
}

BandStats fit_band_stats(const MatrixXd& samples) {
  if (samples.rows() < 2) throw DataError("band statistics need at least two samples");
  BandStats stats;
  stats.mean = samples.colwise().mean().transpose();
  const MatrixXd centered = samples.rowwise() - stats.mean.transpose();
  stats.std = (centered.colwise().squaredNorm().transpose() / double(samples.rows())).cwiseSqrt();
  stats.std = stats.std.cwiseMax(kStdFloor);
  return stats;
}

BandStats fit_band_stats(const PixelSample& sample) { return fit_band_stats(sample.matrix); }

MatrixXd apply_band_stats(const MatrixXd& samples, const BandStats& stats) {
  if (samples.cols() != stats.mean.size()) throw DimensionError("band stats do not match the channel count");
  return ((samples.rowwise() - stats.mean.transpose()).array().rowwise() / stats.std.transpose().array()).matrix();
}

Cube apply_band_stats(const Cube& cube, const BandStats& stats) {
  if (cube.dims().channels != stats.mean.size()) throw DimensionError("band stats do not match the channel count");
  Cube out(cube.dims(), cube.wavelengths());
  for (Index b = 0; b < cube.dims().batch; ++b) out.image(b) = apply_band_stats(MatrixXd(cube.image(b)), stats);
  return out;
}

LinearProjection fit_pca(const MatrixXd& standardized, Index components) {
  const Index N = standardized.rows();
  const Index C = standardized.cols();
  if (components < 1 || components > std::min(N - 1, C)) {
    throw ConfigError("PCA needs 1 <= F <= min(N - 1, C), got F=" + std::to_string(components));
  }
  const MatrixXd centered = standardized.rowwise() - standardized.colwise().mean();
  const MatrixXd cov = (centered.transpose() * centered) / double(N - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("covariance eigendecomposition failed");

  LinearProjection proj;
  proj.kind = ProjectionKind::kPca;
  proj.components.resize(components, C);
  proj.explained_variance.resize(components);
  proj.shift = VectorXd::Zero(C);
  for (Index i = 0; i < components; ++i) {
    const Index col = C - 1 - i;  // eigenvalues come back ascending
    VectorXd v = eig.eigenvectors().col(col);
    Index biggest = 0;
    v.cwiseAbs().maxCoeff(&biggest);
    if (v[biggest] < 0.0) v = -v;
    proj.components.row(i) = v.transpose();
    proj.explained_variance[i] = std::max(eig.eigenvalues()[col], 0.0);
  }
  return proj;
}

std::pair<MatrixXd, MatrixXd> nmf_initial_factors(const MatrixXd& data, Index components, std::uint64_t seed) {
  const double scale = std::sqrt(std::max(data.mean(), 0.0) / double(components));
  Rng rng(seed);
  MatrixXd W(data.rows(), components);
  MatrixXd H(components, data.cols());
  for (Index j = 0; j < W.cols(); ++j) {
    for (Index i = 0; i < W.rows(); ++i) W(i, j) = scale * rng.uniform();
  }
  for (Index j = 0; j < H.cols(); ++j) {
    for (Index i = 0; i < H.rows(); ++i) H(i, j) = scale * rng.uniform();
  }
  return {W, H};
}

LinearProjection fit_nmf_nonnegative(const MatrixXd& data, Index components, const NmfOptions& options) {
  if (components < 1 || components > data.cols()) throw ConfigError("NMF needs 1 <= F <= C");
  if (options.max_iter < 1) throw ConfigError("NMF max_iter must be >= 1");
  for (Index i = 0; i < data.size(); ++i) {
    const double v = data.reshaped()[i];
    if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("NMF input must be finite and non-negative");
  }
  auto [W, H] = nmf_initial_factors(data, components, options.seed);
  const double tiny = std::numeric_limits<double>::min();

  LinearProjection proj;
  proj.kind = ProjectionKind::kNmf;
  proj.shift = VectorXd::Zero(data.cols());
  double previous = (data - W * H).norm();
  for (int it = 1; it <= options.max_iter; ++it) {
    const MatrixXd h_num = W.transpose() * data;
    const MatrixXd h_den = (W.transpose() * W) * H;
    H.array() *= h_num.array() / h_den.array().max(tiny);
    const MatrixXd w_num = data * H.transpose();
    const MatrixXd w_den = W * (H * H.transpose());
    W.array() *= w_num.array() / w_den.array().max(tiny);

    const double residual = (data - W * H).norm();
    proj.residual_history.push_back(residual);
    proj.iterations_run = it;
    const double decrease = previous - residual;
    previous = residual;
    if (decrease <= options.tol * std::max(residual, tiny)) break;
  }
  proj.final_residual = previous;
  proj.components = H;
  return proj;
}

LinearProjection fit_nmf(const MatrixXd& standardized, Index components, const NmfOptions& options) {
  const VectorXd shift = -standardized.colwise().minCoeff().transpose();
  const MatrixXd shifted = standardized.rowwise() + shift.transpose();
  LinearProjection proj = fit_nmf_nonnegative(shifted, components, options);
  proj.shift = shift;
  return proj;
}

ReducedCube<double> project(const Cube& cube, const BandStats& stats, const LinearProjection& projection,
                            int threads) {
  const CubeDims& d = cube.dims();
  if (stats.mean.size() != d.channels || stats.std.size() != d.channels || projection.components.cols() != d.channels ||
      projection.shift.size() != d.channels) {
    throw DimensionError("pipeline was fitted on " + std::to_string(projection.components.cols()) +
                         " channels, cube has " + std::to_string(d.channels));
  }
  ReducedCube<double> out(CubeDims{d.batch, projection.components.rows(), d.height, d.width});
  const Eigen::RowVectorXd offset = (-stats.mean.array() / stats.std.array() + projection.shift.array()).transpose();
  // Fold the per-band scaling into the projection matrix.
  const MatrixXd scaled = (projection.components.array().rowwise() / stats.std.transpose().array()).matrix();
  const Eigen::RowVectorXd bias = offset * projection.components.transpose();
  parallel_for(d.batch, threads, [&](Index b) {
    auto y = out.image(b);
    y.noalias() = cube.image(b) * scaled.transpose();
    y.rowwise() += bias;
  });
  return out;
}

}  // namespace lqe
