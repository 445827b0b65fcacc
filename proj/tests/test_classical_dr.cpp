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
#include "lqe/classical_dr.hpp"
#include "support.hpp"

using namespace lqe;

namespace {

// Two 10x10 images. Class 0 covers the first `first` pixels of image 0 and
// the first `second` pixels of image 1, class 1 the rest. Every channel of
// image m holds the value m, so picked rows reveal their image.
LabeledCube two_image_cube(Index first, Index second, Index classes = 2) {
  const CubeDims dims{2, 3, 10, 10};
  Cube cube(dims, VectorXd::LinSpaced(3, 500.0, 600.0));
  cube.image(1).setConstant(1.0);
  LabelMap labels{2, 10, 10, static_cast<std::uint16_t>(classes), kIgnoreLabel, {}};
  labels.values.assign(200, 1);
  for (Index p = 0; p < first; ++p) labels.values[p] = 0;
  for (Index p = 0; p < second; ++p) labels.values[100 + p] = 0;
  return {cube, labels};
}

Index rows_from_image(const PixelSample& s, std::uint16_t cls, double image) {
  Index n = 0;
  for (Index i = 0; i < s.matrix.rows(); ++i) n += (s.labels[i] == cls && s.matrix(i, 0) == image);
  return n;
}

// Leading eigenvector by power iteration with deflation.
std::pair<VectorXd, double> power_iteration(const MatrixXd& a) {
  VectorXd v = VectorXd::Ones(a.rows()).normalized();
  for (int i = 0; i < 5000; ++i) v = (a * v).normalized();
  return {v, v.dot(a * v)};
}

}  // namespace

TEST_CASE("per-image allocation follows each image's share of the class") {
  const std::vector<LabeledCube> cubes{two_image_cube(30, 70)};
  const auto s = stratified_sample(cubes, 20, 1);
  CHECK(s.per_class_quota == 10);
  CHECK(s.per_class_counts[0] == 10);
  CHECK(s.per_class_counts[1] == 10);
  CHECK(rows_from_image(s, 0, 0.0) == 3);
  CHECK(rows_from_image(s, 0, 1.0) == 7);
  // class 1 has 70 and 30 pixels
  CHECK(rows_from_image(s, 1, 0.0) == 7);
  CHECK(rows_from_image(s, 1, 1.0) == 3);
}

TEST_CASE("allocation stays within one pixel of proportional") {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> d(1, 99);
  for (int trial = 0; trial < 200; ++trial) {
    const Index a = d(gen), b = d(gen);
    const std::vector<LabeledCube> cubes{two_image_cube(a, b)};
    const auto s = stratified_sample(cubes, 2 * 17, trial);
    const Index take = std::min<Index>(17, a + b);
    const double exact = double(take) * double(a) / double(a + b);
    CHECK(std::abs(double(rows_from_image(s, 0, 0.0)) - exact) < 1.0);
    CHECK(rows_from_image(s, 0, 0.0) + rows_from_image(s, 0, 1.0) == take);
  }
}

TEST_CASE("rare classes contribute every pixel they have") {
  const std::vector<LabeledCube> cubes{two_image_cube(1, 3)};
  const auto s = stratified_sample(cubes, 40, 2);
  CHECK(s.per_class_counts[0] == 4);
  CHECK(s.per_class_counts[1] == 20);
  CHECK(s.matrix.rows() == 24);
}

TEST_CASE("sampling never repeats a pixel and is seeded") {
  std::mt19937_64 gen(3);
  LabeledCube item;
  item.cube = testing::random_cube(gen, {2, 4, 8, 8});
  item.labels = LabelMap{2, 8, 8, 3, kIgnoreLabel, testing::random_labels(gen, 128, 3)};
  item.labels.values[5] = kIgnoreLabel;
  const std::vector<LabeledCube> cubes{item};
  const auto a = stratified_sample(cubes, 60, 7);
  const auto b = stratified_sample(cubes, 60, 7);
  CHECK(a.matrix == b.matrix);
  std::set<std::vector<double>> rows;
  for (Index i = 0; i < a.matrix.rows(); ++i) {
    const VectorXd r = a.matrix.row(i).transpose();
    rows.insert(std::vector<double>(r.data(), r.data() + r.size()));
  }
  CHECK(static_cast<Index>(rows.size()) == a.matrix.rows());
  CHECK_THROWS_AS(stratified_sample(cubes, 2, 7), ConfigError);
  CHECK_THROWS_AS(stratified_sample({}, 10, 7), DataError);
}

TEST_CASE("band statistics use the population deviation with a floor") {
  MatrixXd x(4, 2);
  x << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0;
  const auto s = fit_band_stats(x);
  CHECK(s.mean[0] == 2.5);
  CHECK(s.std[0] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(s.std[1] == kStdFloor);
  const MatrixXd z = apply_band_stats(x, s);
  CHECK(z.col(0).mean() == doctest::Approx(0.0).scale(1.0));
  CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(fit_band_stats(MatrixXd::Ones(1, 2)), DataError);
  CHECK_THROWS_AS(apply_band_stats(MatrixXd::Ones(2, 3), s), DimensionError);
}

TEST_CASE("PCA components match power iteration on the covariance") {
  std::mt19937_64 gen(4);
  const Index N = 200, C = 5;
  MatrixXd mix(C, C);
  mix.setZero();
  mix.diagonal() << 3.0, 2.0, 1.0, 0.5, 0.2;
  mix(0, 1) = 0.7;
  mix(2, 4) = -0.4;
  const MatrixXd x = testing::uniform_vector(gen, N * C, -1.0, 1.0).reshaped(N, C) * mix;
  const auto proj = fit_pca(x, 2);

  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  MatrixXd cov = centered.transpose() * centered / double(N - 1);
  for (Index i = 0; i < 2; ++i) {
    auto [v, lambda] = power_iteration(cov);
    const VectorXd got = proj.components.row(i).transpose();
    CHECK(std::abs(std::abs(got.dot(v)) - 1.0) < 1e-9);
    CHECK(proj.explained_variance[i] == doctest::Approx(lambda).epsilon(1e-9));
    Index big = 0;
    got.cwiseAbs().maxCoeff(&big);
    CHECK(got[big] > 0.0);
    cov -= lambda * v * v.transpose();
  }
  const MatrixXd gram = proj.components * proj.components.transpose();
  CHECK((gram - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(proj.shift.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(fit_pca(x, 6), ConfigError);
  CHECK_THROWS_AS(fit_pca(x, 0), ConfigError);
}

TEST_CASE("one NMF iteration matches the multiplicative update rules") {
  MatrixXd x(4, 3);
  x << 1.0, 2.0, 0.5, 0.0, 1.5, 2.0, 3.0, 0.2, 1.0, 0.7, 0.7, 0.7;
  NmfOptions opt;
  opt.max_iter = 1;
  opt.seed = 9;
  const auto [w, h0] = nmf_initial_factors(x, 2, 9);
  MatrixXd h = h0;
  CHECK(w.minCoeff() >= 0.0);
  CHECK(h0.maxCoeff() < std::sqrt(x.mean() / 2.0));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) {
      double num = 0.0, den = 0.0;
      for (Index n = 0; n < 4; ++n) {
        num += w(n, i) * x(n, j);
        double wh = 0.0;
        for (Index k = 0; k < 2; ++k) wh += w(n, k) * h0(k, j);
        den += w(n, i) * wh;
      }
      h(i, j) *= num / den;
    }
  const auto proj = fit_nmf_nonnegative(x, 2, opt);
  CHECK(proj.iterations_run == 1);
  CHECK((proj.components - h).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("NMF residual never increases and reaches zero on rank-one data") {
  std::mt19937_64 gen(5);
  const MatrixXd x = testing::uniform_vector(gen, 30 * 6, 0.0, 2.0).reshaped(30, 6);
  NmfOptions opt;
  opt.max_iter = 300;
  opt.tol = 0.0;
  const auto proj = fit_nmf_nonnegative(x, 3, opt);
  CHECK(proj.iterations_run == 300);
  for (std::size_t i = 1; i < proj.residual_history.size(); ++i) {
    CHECK(proj.residual_history[i] <= proj.residual_history[i - 1] * (1.0 + 1e-12));
  }
  CHECK(proj.components.minCoeff() >= 0.0);

  const VectorXd u = testing::uniform_vector(gen, 20, 0.5, 1.5);
  const VectorXd v = testing::uniform_vector(gen, 5, 0.5, 1.5);
  const MatrixXd r1 = u * v.transpose();
  opt.max_iter = 2000;
  opt.tol = 1e-14;
  CHECK(fit_nmf_nonnegative(r1, 1, opt).final_residual / r1.norm() < 1e-6);
}

TEST_CASE("NMF input checks") {
  MatrixXd x = MatrixXd::Ones(3, 3);
  x(1, 1) = -0.5;
  CHECK_THROWS_AS(fit_nmf_nonnegative(x, 1, NmfOptions{}), DataError);
  CHECK_THROWS_AS(fit_nmf_nonnegative(MatrixXd::Ones(3, 3), 4, NmfOptions{}), ConfigError);
  const auto shifted = fit_nmf(x, 1, NmfOptions{});
  CHECK(shifted.shift[1] == 0.5);
  CHECK(shifted.shift[0] == -1.0);
  CHECK(projection_kind_from_string("nmf") == ProjectionKind::kNmf);
  CHECK_THROWS_AS(projection_kind_from_string("ica"), ConfigError);
}

TEST_CASE("project matches a per-pixel loop") {
  std::mt19937_64 gen(6);
  const Cube cube = testing::random_cube(gen, {2, 4, 3, 5});
  BandStats stats{testing::uniform_vector(gen, 4, -0.5, 0.5), testing::uniform_vector(gen, 4, 0.5, 2.0)};
  LinearProjection proj;
  proj.components = testing::uniform_vector(gen, 8, -1.0, 1.0).reshaped(2, 4);
  proj.shift = testing::uniform_vector(gen, 4, 0.0, 1.0);
  const auto y = project(cube, stats, proj);
  for (Index b = 0; b < 2; ++b)
    for (Index f = 0; f < 2; ++f)
      for (Index h = 0; h < 3; ++h)
        for (Index w = 0; w < 5; ++w) {
          double s = 0.0;
          for (Index c = 0; c < 4; ++c) {
            s += proj.components(f, c) * ((cube(b, c, h, w) - stats.mean[c]) / stats.std[c] + proj.shift[c]);
          }
          CHECK(y(b, f, h, w) == doctest::Approx(s).epsilon(1e-12));
        }
  proj.components = MatrixXd::Ones(2, 3);
  CHECK_THROWS_AS(project(cube, stats, proj), DimensionError);
}
