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

#include <set>

#include "doctest.h"
#include "lqe/synthetic.hpp"
#include "support.hpp"

using namespace lqe;

namespace {

SynthSpec noiseless(std::uint64_t seed) {
  SynthSpec s = testing::planted_spec(seed, 2, 1);
  s.noise_sigma = 0.0;
  for (auto& n : s.nuisance) n.sigma = 0.0;
  return s;
}

// Per-class mean spectrum over every labeled pixel.
MatrixXd class_means(const LabeledCube& item, Index K, std::vector<Index>& counts) {
  const CubeDims& d = item.cube.dims();
  MatrixXd sums = MatrixXd::Zero(K, d.channels);
  counts.assign(static_cast<std::size_t>(K), 0);
  for (Index b = 0; b < d.batch; ++b)
    for (Index p = 0; p < d.pixels(); ++p) {
      const auto k = item.labels.values[static_cast<std::size_t>(b * d.pixels() + p)];
      sums.row(k) += item.cube.image(b).row(p);
      ++counts[k];
    }
  for (Index k = 0; k < K; ++k) sums.row(k) /= double(std::max<Index>(counts[k], 1));
  return sums;
}

}  // namespace

TEST_CASE("wavelength presets") {
  const VectorXd hyko = hyko_wavelengths();
  CHECK(hyko.size() == 15);
  CHECK(hyko[0] == 470.0);
  CHECK(hyko[14] == 630.0);
  const VectorXd drive = hsi_drive_wavelengths();
  CHECK(drive.size() == 25);
  CHECK(drive[0] == 600.0);
  CHECK(drive[24] == 975.0);
  CHECK(drive[1] == 615.625);
  CHECK_THROWS_AS(wavelength_grid(1, 400.0, 500.0), ConfigError);
}

TEST_CASE("bumps are truncated at four widths") {
  const Bump b{500.0, 10.0, 2.0};
  CHECK(b(500.0) == 2.0);
  CHECK(b(540.0) == doctest::Approx(2.0 * std::exp(-8.0)).epsilon(1e-15));
  CHECK(b(540.001) == 0.0);
  CHECK(b(459.999) == 0.0);
}

TEST_CASE("noise-free pixels equal their class spectrum") {
  const SynthSpec spec = noiseless(1);
  const auto item = generate_images(spec, 0, 2);
  const CubeDims& d = item.cube.dims();
  for (Index b = 0; b < d.batch; ++b)
    for (Index p = 0; p < d.pixels(); ++p) {
      const auto k = item.labels.values[static_cast<std::size_t>(b * d.pixels() + p)];
      const VectorXd expected = class_spectrum(spec, k, spec.wavelengths_nm);
      CHECK((item.cube.image(b).row(p).transpose() - expected).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("metameric classes coincide away from the planted bands") {
  const SynthSpec spec = noiseless(2);
  const VectorXd s0 = class_spectrum(spec, 0, spec.wavelengths_nm);
  const VectorXd s1 = class_spectrum(spec, 1, spec.wavelengths_nm);
  const VectorXd s2 = class_spectrum(spec, 2, spec.wavelengths_nm);
  int differing = 0;
  for (Index c = 0; c < spec.wavelengths_nm.size(); ++c) {
    const double lambda = spec.wavelengths_nm[c];
    const bool near1 = std::abs(lambda - 693.75) <= 80.0;
    const bool near2 = std::abs(lambda - 862.5) <= 80.0;
    if (!near1) CHECK(s1[c] == s0[c]);
    if (!near2) CHECK(s2[c] == s0[c]);
    if (!near1 && !near2) CHECK(s1[c] == s2[c]);
    differing += s1[c] != s2[c];
  }
  CHECK(differing > 0);
  CHECK(s1[6] - s0[6] == doctest::Approx(0.15).epsilon(1e-15));
  const auto pairs = metameric_pairs(spec);
  CHECK(pairs.size() == 3);
}

TEST_CASE("planted bump survives in the class means") {
  const SynthSpec spec = testing::planted_spec(3, 4, 1);
  const auto item = generate_images(spec, 0, 4);
  std::vector<Index> counts;
  const MatrixXd means = class_means(item, 3, counts);
  REQUIRE(*std::min_element(counts.begin(), counts.end()) > 20);
  // Channel 6 sits on 693.75 nm; its per-pixel spread comes from the
  // 625 nm nuisance bump plus white noise.
  const double tail = std::exp(-0.5 * std::pow((693.75 - 625.0) / 20.0, 2));
  const double sigma = std::sqrt(std::pow(0.3 * tail, 2) + 0.01 * 0.01);
  const double n = double(std::min(counts[0], counts[1]));
  CHECK(means(1, 6) - means(0, 6) >= 0.15 - 3.0 * sigma * std::sqrt(2.0 / n));
  CHECK(means(1, 6) - means(0, 6) <= 0.15 + 3.0 * sigma * std::sqrt(2.0 / n));
}

TEST_CASE("noise-free class means are exact") {
  const SynthSpec spec = noiseless(4);
  const auto item = generate_images(spec, 0, 2);
  std::vector<Index> counts;
  const MatrixXd means = class_means(item, 3, counts);
  for (Index k = 0; k < 3; ++k) {
    if (counts[k] == 0) continue;
    CHECK((means.row(k).transpose() - class_spectrum(spec, k, spec.wavelengths_nm)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("generation is seeded and independent of the thread count") {
  SynthSpec spec = testing::planted_spec(5, 3, 2);
  const auto a = gen_synthetic(spec);
  const auto b = gen_synthetic(spec);
  CHECK(a.train.cube.data() == b.train.cube.data());
  CHECK(a.val.labels.values == b.val.labels.values);
  spec.threads = 4;
  const auto c = gen_synthetic(spec);
  CHECK(a.train.cube.data() == c.train.cube.data());
  CHECK(a.val.cube.data() == c.val.cube.data());
  spec.seed = 6;
  CHECK(gen_synthetic(spec).train.cube.data() != a.train.cube.data());
}

TEST_CASE("validation splits continue the image sequence") {
  const SynthSpec spec = testing::planted_spec(7, 2, 2);
  const auto data = gen_synthetic(spec);
  const auto third = generate_images(spec, 2, 1);
  CHECK(data.val.cube.image(0) == third.cube.image(0));
  CHECK(data.train.cube.dims().batch == 2);
  CHECK(data.val.labels.batch == 2);
}

TEST_CASE("labels follow the blob layout") {
  SynthSpec spec = testing::planted_spec(8, 4, 1);
  spec.blobs_per_image = 1;
  const auto item = generate_images(spec, 0, 4);
  for (auto v : item.labels.values) CHECK(v == 0);
  spec.blobs_per_image = 12;
  const auto many = generate_images(spec, 0, 4);
  std::set<std::uint16_t> seen(many.labels.values.begin(), many.labels.values.end());
  CHECK(seen.size() == 3);
}

TEST_CASE("spec validation") {
  SynthSpec spec = testing::planted_spec(9);
  CHECK_NOTHROW(spec.validate());
  SynthSpec broken = spec;
  broken.classes[1].push_back({760.0, 20.0, 0.1});
  broken.classes[2].push_back({900.0, 20.0, 0.2});
  broken.classes[0].push_back({640.0, 20.0, 0.2});
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  broken = spec;
  broken.noise_sigma = -1.0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  broken = spec;
  broken.classes.resize(1);
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  broken = spec;
  broken.height = 0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
}
