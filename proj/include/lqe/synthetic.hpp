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
 Labeled synthetic hypercubes with planted discriminative wavelengths.

 A pixel of class k at channel wavelength lambda is

     background(lambda) + class_k(lambda) + sum_j u_j nuisance_j(lambda) + n

 where every term is a sum of truncated Gaussian bumps
 h exp(-(lambda - center)^2 / (2 width^2)) for |lambda - center| <= 4 width
 (zero outside), u_j ~ N(0, sigma_j) is drawn per pixel, and n ~ N(0,
 noise_sigma) per pixel and channel.

 Labels come from a Voronoi layout: each image places `blobs_per_image` random
 seeds, seed i carries class i mod K, and a pixel takes the class of its
 nearest seed.

 At least one pair of classes must be metameric: their bump lists agree
 exactly once bumps centered on a planted wavelength are removed, and differ
 otherwise.

 Random streams: the layout of image m uses stream (1 << 40) + m; pixel p of
 image m uses stream (m << 24) + p. Output therefore does not depend on the
 thread count.
*/

#include <cstdint>
#include <string>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/hypercube.hpp"

namespace lqe {

struct Bump {
  double center_nm = 0.0;
  double width_nm = 1.0;
  double height = 0.0;

  double operator()(double lambda_nm) const;
  friend bool operator==(const Bump&, const Bump&) = default;
};

struct NuisanceBump {
  double center_nm = 0.0;
  double width_nm = 1.0;
  double sigma = 0.0;  // stddev of the per-pixel amplitude
};

struct SynthSpec {
  VectorXd wavelengths_nm;
  std::vector<Bump> background;
  std::vector<std::vector<Bump>> classes;  // K entries
  std::vector<double> planted_centers_nm;
  std::vector<NuisanceBump> nuisance;
  double noise_sigma = 0.0;
  Index blobs_per_image = 6;
  Index height = 16;
  Index width = 16;
  Index train_images = 4;
  Index val_images = 2;
  std::uint64_t seed = 0;
  int threads = 1;

  Index num_classes() const { return static_cast<Index>(classes.size()); }
  void validate() const;
};

/// Evenly spaced grid of `count` channels from start to end inclusive.
VectorXd wavelength_grid(Index count, double start_nm, double end_nm);

/// 15 channels, 470-630 nm.
VectorXd hyko_wavelengths();
/// 25 channels, 600-975 nm.
VectorXd hsi_drive_wavelengths();

/// Noise-free spectrum of class k at the given wavelengths.
VectorXd class_spectrum(const SynthSpec& spec, Index k, const VectorXd& wavelengths_nm);

/// Pairs (i, j), i < j, that satisfy the metameric condition.
std::vector<std::pair<Index, Index>> metameric_pairs(const SynthSpec& spec);

/// Images [first_image, first_image + count) of the dataset described by spec.
LabeledCube generate_images(const SynthSpec& spec, Index first_image, Index count);

struct SynthDataset {
  LabeledCube train;
  LabeledCube val;
};

/// Train images are 0..train_images-1, val images follow.
SynthDataset gen_synthetic(const SynthSpec& spec);

}  // namespace lqe
