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

#include "lqe/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "lqe/parallel.hpp"
#include "lqe/rng.hpp"

namespace lqe {

namespace {

constexpr double kBumpSupport = 4.0;
constexpr std::uint64_t kLayoutStream = std::uint64_t{1} << 40;

bool on_planted(const Bump& bump, const std::vector<double>& planted) {
  return std::any_of(planted.begin(), planted.end(), [&](double c) { return std::abs(c - bump.center_nm) < 1e-9; });
}

std::vector<Bump> off_planted(const std::vector<Bump>& bumps, const std::vector<double>& planted) {
  std::vector<Bump> out;
  for (const auto& b : bumps) {
    if (!on_planted(b, planted)) out.push_back(b);
  }
  const auto key = [](const Bump& b) { return std::tuple(b.center_nm, b.width_nm, b.height); };
  std::sort(out.begin(), out.end(), [&](const Bump& a, const Bump& b) { return key(a) < key(b); });
  return out;
}

double sum_bumps(const std::vector<Bump>& bumps, double lambda) {
  double s = 0.0;
  for (const auto& b : bumps) s += b(lambda);
  return s;
}

}  // namespace

double Bump::operator()(double lambda_nm) const {
  const double d = lambda_nm - center_nm;
  if (std::abs(d) > kBumpSupport * width_nm) return 0.0;
  const double z = d / width_nm;
  return height * std::exp(-0.5 * z * z);
}

VectorXd wavelength_grid(Index count, double start_nm, double end_nm) {
  if (count < 2 || !(end_nm > start_nm)) throw ConfigError("wavelength grid needs count >= 2 and end > start");
  return VectorXd::LinSpaced(count, start_nm, end_nm);
}

VectorXd hyko_wavelengths() { return wavelength_grid(15, 470.0, 630.0); }
VectorXd hsi_drive_wavelengths() { return wavelength_grid(25, 600.0, 975.0); }

std::vector<std::pair<Index, Index>> metameric_pairs(const SynthSpec& spec) {
  std::vector<std::pair<Index, Index>> pairs;
  const Index K = spec.num_classes();
  for (Index i = 0; i < K; ++i) {
    for (Index j = i + 1; j < K; ++j) {
      const auto& a = spec.classes[static_cast<std::size_t>(i)];
      const auto& b = spec.classes[static_cast<std::size_t>(j)];
      if (off_planted(a, spec.planted_centers_nm) != off_planted(b, spec.planted_centers_nm)) continue;
      // They must actually differ somewhere on a planted center.
      std::vector<Bump> pa, pb;
      for (const auto& x : a) {
        if (on_planted(x, spec.planted_centers_nm)) pa.push_back(x);
      }
      for (const auto& x : b) {
        if (on_planted(x, spec.planted_centers_nm)) pb.push_back(x);
      }
      bool differ = false;
      for (double c : spec.planted_centers_nm) {
        if (std::abs(sum_bumps(pa, c) - sum_bumps(pb, c)) > 0.0) differ = true;
      }
      if (differ) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

void SynthSpec::validate() const {
  if (wavelengths_nm.size() < 2) throw ConfigError("synthetic spec needs at least two channels");
  for (Index c = 1; c < wavelengths_nm.size(); ++c) {
    if (!(wavelengths_nm[c] > wavelengths_nm[c - 1])) throw ConfigError("wavelengths must be strictly increasing");
  }
  if (num_classes() < 2) throw ConfigError("synthetic spec needs K >= 2");
  if (num_classes() >= kIgnoreLabel) throw ConfigError("too many classes");
  if (height < 1 || width < 1 || train_images < 1 || val_images < 1 || blobs_per_image < 1) {
    throw ConfigError("synthetic dims and image counts must be >= 1");
  }
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  const auto check_bump = [](double width) {
    if (!(width > 0.0)) throw ConfigError("bump widths must be > 0");
  };
  for (const auto& b : background) check_bump(b.width_nm);
  for (const auto& cls : classes) {
    for (const auto& b : cls) check_bump(b.width_nm);
  }
  for (const auto& n : nuisance) {
    check_bump(n.width_nm);
    if (n.sigma < 0.0) throw ConfigError("nuisance sigma must be >= 0");
  }
  if (metameric_pairs(*this).empty()) {
    throw ConfigError("no pair of classes is metameric outside the planted centers");
  }
}

VectorXd class_spectrum(const SynthSpec& spec, Index k, const VectorXd& wavelengths_nm) {
  VectorXd s(wavelengths_nm.size());
  for (Index c = 0; c < wavelengths_nm.size(); ++c) {
    const double lambda = wavelengths_nm[c];
    s[c] = sum_bumps(spec.background, lambda) + sum_bumps(spec.classes[static_cast<std::size_t>(k)], lambda);
  }
  return s;
}

LabeledCube generate_images(const SynthSpec& spec, Index first_image, Index count) {
  spec.validate();
  const Index K = spec.num_classes();
  const Index C = spec.wavelengths_nm.size();
  const Index H = spec.height, W = spec.width;
  const CubeDims dims{count, C, H, W};

  MatrixXd spectra(K, C);
  for (Index k = 0; k < K; ++k) spectra.row(k) = class_spectrum(spec, k, spec.wavelengths_nm).transpose();
  MatrixXd nuisance(static_cast<Index>(spec.nuisance.size()), C);
  for (std::size_t j = 0; j < spec.nuisance.size(); ++j) {
    const Bump unit{spec.nuisance[j].center_nm, spec.nuisance[j].width_nm, 1.0};
    for (Index c = 0; c < C; ++c) nuisance(static_cast<Index>(j), c) = unit(spec.wavelengths_nm[c]);
  }

  LabeledCube out{Cube(dims, spec.wavelengths_nm), LabelMap{}};
  out.labels.batch = count;
  out.labels.height = H;
  out.labels.width = W;
  out.labels.num_classes = static_cast<std::uint16_t>(K);
  out.labels.values.resize(static_cast<std::size_t>(count * H * W));

  parallel_for(count, spec.threads, [&](Index b) {
    const auto image_id = static_cast<std::uint64_t>(first_image + b);
    Rng layout(spec.seed, kLayoutStream + image_id);
    std::vector<std::pair<double, double>> seeds(static_cast<std::size_t>(spec.blobs_per_image));
    for (auto& s : seeds) s = {layout.uniform(0.0, double(H)), layout.uniform(0.0, double(W))};

    auto image = out.cube.image(b);
    for (Index h = 0; h < H; ++h) {
      for (Index w = 0; w < W; ++w) {
        const Index pixel = h * W + w;
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < seeds.size(); ++i) {
          const double dh = seeds[i].first - (h + 0.5), dw = seeds[i].second - (w + 0.5);
          const double d2 = dh * dh + dw * dw;
          if (d2 < best) {
            best = d2;
            nearest = i;
          }
        }
        const auto k = static_cast<Index>(nearest % static_cast<std::size_t>(K));
        out.labels.values[static_cast<std::size_t>(b * H * W + pixel)] = static_cast<std::uint16_t>(k);

        Rng rng(spec.seed, (image_id << 24) + static_cast<std::uint64_t>(pixel));
        Eigen::RowVectorXd x = spectra.row(k);
        for (Index j = 0; j < nuisance.rows(); ++j) {
          x += rng.normal(0.0, spec.nuisance[static_cast<std::size_t>(j)].sigma) * nuisance.row(j);
        }
        if (spec.noise_sigma > 0.0) {
          for (Index c = 0; c < C; ++c) x[c] += rng.normal(0.0, spec.noise_sigma);
        }
        image.row(pixel) = x;
      }
    }
  });
  return out;
}

SynthDataset gen_synthetic(const SynthSpec& spec) {
  return {generate_images(spec, 0, spec.train_images), generate_images(spec, spec.train_images, spec.val_images)};
}

}  // namespace lqe
