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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lqe/filter_bank.hpp"
#include "lqe/hypercube.hpp"
#include "lqe/synthetic.hpp"

namespace lqe::testing {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (std::abs(numeric) + 1e-8);
}

/// Central difference of f along coordinate i of x.
inline double central_difference(const std::function<double(const VectorXd&)>& f, VectorXd x, Index i,
                                 double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline VectorXd numeric_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                                 double h = 1e-5) {
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) g[i] = central_difference(f, x, i, h);
  return g;
}

/// Fourth-order central difference over the stencil x +- h, x +- 2h.
inline VectorXd numeric_gradient4(const std::function<double(const VectorXd&)>& f, VectorXd x, double h = 1e-3) {
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    double v[4];
    const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int k = 0; k < 4; ++k) {
      x[i] = x0 + offsets[k] * h;
      v[k] = f(x);
    }
    x[i] = x0;
    g[i] = (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
  }
  return g;
}

/// Largest componentwise relative error. Components far below the gradient's
/// largest entry are measured against `floor_ratio` of that entry instead of
/// their own size; the default sits above central-difference roundoff.
inline double max_rel_err(const VectorXd& analytic, const VectorXd& numeric, double floor_ratio = 1e-6) {
  const double floor = floor_ratio * (numeric.size() > 0 ? numeric.cwiseAbs().maxCoeff() : 0.0) + 1e-8;
  double worst = 0.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(std::abs(numeric[i]), floor));
  }
  return worst;
}

inline VectorXd uniform_vector(std::mt19937_64& gen, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

inline Cube random_cube(std::mt19937_64& gen, CubeDims dims, double lo = 0.0, double hi = 1.0,
                        double start_nm = 400.0, double end_nm = 700.0) {
  return Cube(dims, VectorXd::LinSpaced(dims.channels, start_nm, end_nm), uniform_vector(gen, dims.size(), lo, hi));
}

inline std::vector<std::uint16_t> random_labels(std::mt19937_64& gen, Index n, Index classes) {
  std::uniform_int_distribution<int> d(0, static_cast<int>(classes) - 1);
  std::vector<std::uint16_t> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = static_cast<std::uint16_t>(d(gen));
  return out;
}

/// A fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lqe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random filter bank with peaks placed safely inside [0, 1].
inline FilterBankParams<double> random_filters(std::mt19937_64& gen, Index F, Index P, double bw_lo = 0.08,
                                               double bw_hi = 0.2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FilterBankParams<double> params;
  static_cast<PeakArrays<double>&>(params) = PeakArrays<double>::zeros(F, P);
  params.range = {400.0, 700.0};
  for (Index f = 0; f < F; ++f) {
    for (Index p = 0; p < P; ++p) {
      params.centroid(f, p) = 0.1 + 0.8 * u(gen);
      params.log_bandwidth(f, p) = std::log(bw_lo + (bw_hi - bw_lo) * u(gen));
      params.amplitude_logit(f, p) = -1.5 + 3.0 * u(gen);
      params.skewness(f, p) = -1.0 + 2.0 * u(gen);
    }
  }
  return params;
}

/// Three-class task on the 25-channel grid: classes 1 and 2 differ from
/// class 0 only by a narrow bump at 693.75 nm or 862.5 nm, and broad
/// nuisance bumps vary per pixel.
inline SynthSpec planted_spec(std::uint64_t seed, Index train_images = 8, Index val_images = 4) {
  SynthSpec s;
  s.wavelengths_nm = hsi_drive_wavelengths();
  s.background = {{790.0, 200.0, 0.4}};
  s.classes = {{}, {{693.75, 20.0, 0.15}}, {{862.5, 20.0, 0.15}}};
  s.planted_centers_nm = {693.75, 862.5};
  s.nuisance = {{625.0, 20.0, 0.3}, {940.0, 20.0, 0.3}, {780.0, 15.0, 0.3}};
  s.noise_sigma = 0.01;
  s.height = 16;
  s.width = 16;
  s.train_images = train_images;
  s.val_images = val_images;
  s.seed = seed;
  return s;
}

}  // namespace lqe::testing
