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

#include "lqe/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lqe/metrics.hpp"
#include "lqe/optimizer.hpp"
#include "lqe/projection.hpp"
#include "lqe/rng.hpp"

namespace lqe {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) throw ConfigError("patience must lie in [1, max_epochs]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (accumulate < 1) throw ConfigError("accumulate must be >= 1");
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (filter_weight_decay < 0.0 || head_weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
  if (class_weights && (class_weights->array() < 0.0).any()) throw ConfigError("class weights must be >= 0");
  reg.validate();
}

MatrixXd reduce_to_features(const FilterBankParams<double>& filters, const Cube& cube, int threads) {
  const auto response = evaluate_on_wavelengths<double>(filters, cube.wavelengths());
  const auto reduced = apply_filter_bank<double>(cube, response, threads);
  const CubeDims& d = reduced.dims();
  MatrixXd features(d.batch * d.pixels(), d.channels);
  for (Index b = 0; b < d.batch; ++b) features.middleRows(b * d.pixels(), d.pixels()) = reduced.image(b);
  return features;
}

std::vector<std::uint16_t> predict_labels(const MatrixXd& logits) {
  std::vector<std::uint16_t> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index k = 0;
    logits.row(i).maxCoeff(&k);
    out[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(k);
  }
  return out;
}

ObjectiveResult evaluate_objective(const FilterBankParams<double>& filters, const SegHead& head, const Cube& batch,
                                   std::span<const std::uint16_t> labels, const VectorXd& class_weights,
                                   const RegConfig& reg, int threads) {
  const CubeDims& d = batch.dims();
  if (static_cast<Index>(labels.size()) != d.batch * d.pixels()) {
    throw DimensionError("batch labels do not match the batch cube");
  }
  const auto response = evaluate_on_wavelengths<double>(filters, batch.wavelengths());
  const auto reduced = apply_filter_bank<double>(batch, response, threads);
  const Index F = reduced.dims().channels;

  MatrixXd features(d.batch * d.pixels(), F);
  for (Index b = 0; b < d.batch; ++b) features.middleRows(b * d.pixels(), d.pixels()) = reduced.image(b);

  HeadCache cache;
  ObjectiveResult out;
  out.logits = head.forward(features, &cache);
  const SegLossResult seg = seg_loss(out.logits, labels, class_weights);
  const MatrixXd grad_features = head.backward(cache, seg.grad, &out.head_grad);

  Tensor4<double> upstream(reduced.dims());
  for (Index b = 0; b < d.batch; ++b) upstream.image(b) = grad_features.middleRows(b * d.pixels(), d.pixels());
  auto back = backward<double>(batch, response, upstream, false, threads);

  const RegResult<double> penalty = total_reg<double>(filters, reg);
  out.seg_loss = seg.value;
  out.reg = penalty.losses;
  out.total = total_loss(seg.value, penalty.losses, reg.lambda_reg);
  out.filter_grad = std::move(back.params);
  auto scaled = penalty.grad;
  scaled *= reg.lambda_reg;
  out.filter_grad += scaled;
  return out;
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554600000000ULL;

struct BatchOutput {
  double seg_loss = 0.0;
  VectorXd filter_grad;  // empty when filters are fixed
  VectorXd head_grad;
  std::vector<std::uint16_t> predictions;
  std::vector<std::uint16_t> labels;
};

struct ValOutput {
  ConfusionMatrix confusion;
  double loss = 0.0;
};

/// Supplies batches and validation passes; the training loop is shared.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual Index num_train_images() const = 0;
  virtual BatchOutput run_batch(std::span<const Index> images, const SegHead& head, const VectorXd& weights) = 0;
  virtual ValOutput run_validation(const SegHead& head, const VectorXd& weights, Index num_classes) = 0;
  virtual std::vector<std::uint16_t> all_train_labels() const = 0;

  // Filter bank access; trivial for fixed reductions.
  virtual bool learns_filters() const { return false; }
  virtual VectorXd filter_parameters() const { return {}; }
  virtual void set_filter_parameters(const VectorXd&) {}
  virtual RegLosses<double> current_reg() const { return {}; }
  virtual MatrixXd centroids() const { return {}; }
};

class CubeProblem final : public Problem {
 public:
  CubeProblem(const std::vector<LabeledCube>& train, const std::vector<LabeledCube>& val,
              FilterBankParams<double> filters, const TrainConfig& config)
      : train_(train), val_(val), filters_(std::move(filters)), config_(config) {
    for (std::size_t i = 0; i < train_.size(); ++i) {
      for (Index b = 0; b < train_[i].cube.dims().batch; ++b) images_.push_back({i, b});
    }
  }

  Index num_train_images() const override { return static_cast<Index>(images_.size()); }

  BatchOutput run_batch(std::span<const Index> images, const SegHead& head, const VectorXd& weights) override {
    const Cube& first = train_[images_[static_cast<std::size_t>(images[0])].first].cube;
    CubeDims dims = first.dims();
    dims.batch = static_cast<Index>(images.size());
    Cube batch(dims, first.wavelengths());
    BatchOutput out;
    out.labels.reserve(static_cast<std::size_t>(dims.batch * dims.pixels()));
    for (Index j = 0; j < dims.batch; ++j) {
      const auto [cube_index, b] = images_[static_cast<std::size_t>(images[static_cast<std::size_t>(j)])];
      const LabeledCube& src = train_[cube_index];
      batch.image(j) = src.cube.image(b);
      const auto begin = src.labels.values.begin() + b * dims.pixels();
      out.labels.insert(out.labels.end(), begin, begin + dims.pixels());
    }
    ObjectiveResult obj =
        evaluate_objective(filters_, head, batch, out.labels, weights, config_.reg, config_.effective_threads());
    out.seg_loss = obj.seg_loss;
    out.filter_grad = obj.filter_grad.flatten();
    out.head_grad = std::move(obj.head_grad);
    out.predictions = predict_labels(obj.logits);
    return out;
  }

  ValOutput run_validation(const SegHead& head, const VectorXd& weights, Index num_classes) override {
    ValOutput out{ConfusionMatrix(num_classes), 0.0};
    for (const auto& item : val_) {
      const MatrixXd logits = head.forward(reduce_to_features(filters_, item.cube, config_.effective_threads()), nullptr);
      out.loss += seg_loss(logits, item.labels.values, weights).value;
      out.confusion.accumulate(predict_labels(logits), item.labels.values, item.labels.ignore);
    }
    out.loss /= static_cast<double>(val_.size());
    return out;
  }

  std::vector<std::uint16_t> all_train_labels() const override {
    std::vector<std::uint16_t> all;
    for (const auto& item : train_) all.insert(all.end(), item.labels.values.begin(), item.labels.values.end());
    return all;
  }

  bool learns_filters() const override { return true; }
  VectorXd filter_parameters() const override { return filters_.flatten(); }
  void set_filter_parameters(const VectorXd& flat) override { filters_.assign_flat(flat); }
  RegLosses<double> current_reg() const override { return total_reg<double>(filters_, config_.reg).losses; }
  MatrixXd centroids() const override { return filters_.centroid; }
  const FilterBankParams<double>& filters() const { return filters_; }

 private:
  const std::vector<LabeledCube>& train_;
  const std::vector<LabeledCube>& val_;
  FilterBankParams<double> filters_;
  const TrainConfig& config_;
  std::vector<std::pair<std::size_t, Index>> images_;
};

class FeatureProblem final : public Problem {
 public:
  FeatureProblem(const std::vector<FeatureImage>& train, const std::vector<FeatureImage>& val)
      : train_(train), val_(val) {}

  Index num_train_images() const override { return static_cast<Index>(train_.size()); }

  BatchOutput run_batch(std::span<const Index> images, const SegHead& head, const VectorXd& weights) override {
    Index rows = 0;
    for (Index i : images) rows += train_[static_cast<std::size_t>(i)].features.rows();
    MatrixXd features(rows, head.num_features());
    BatchOutput out;
    Index at = 0;
    for (Index i : images) {
      const auto& img = train_[static_cast<std::size_t>(i)];
      features.middleRows(at, img.features.rows()) = img.features;
      at += img.features.rows();
      out.labels.insert(out.labels.end(), img.labels.begin(), img.labels.end());
    }
    HeadCache cache;
    const MatrixXd logits = head.forward(features, &cache);
    const SegLossResult seg = seg_loss(logits, out.labels, weights);
    head.backward(cache, seg.grad, &out.head_grad);
    out.seg_loss = seg.value;
    out.predictions = predict_labels(logits);
    return out;
  }

  ValOutput run_validation(const SegHead& head, const VectorXd& weights, Index num_classes) override {
    ValOutput out{ConfusionMatrix(num_classes), 0.0};
    for (const auto& img : val_) {
      const MatrixXd logits = head.forward(img.features, nullptr);
      out.loss += seg_loss(logits, img.labels, weights).value;
      out.confusion.accumulate(predict_labels(logits), img.labels);
    }
    out.loss /= static_cast<double>(val_.size());
    return out;
  }

  std::vector<std::uint16_t> all_train_labels() const override {
    std::vector<std::uint16_t> all;
    for (const auto& img : train_) all.insert(all.end(), img.labels.begin(), img.labels.end());
    return all;
  }

 private:
  const std::vector<FeatureImage>& train_;
  const std::vector<FeatureImage>& val_;
};

int count_out_of_range(const MatrixXd& centroids) {
  int n = 0;
  for (Index i = 0; i < centroids.size(); ++i) {
    const double c = centroids.reshaped()[i];
    if (c < 0.0 || c > 1.0) ++n;
  }
  return n;
}

double miou_or_zero(const ConfusionMatrix& cm) { return cm.total() > 0 ? compute_metrics(cm).miou : 0.0; }

void run_training(Problem& problem, SegHead& head, Index num_classes, const TrainConfig& config,
                  TrainReport& report) {
  const VectorXd weights = config.class_weights
                               ? *config.class_weights
                               : inverse_frequency_weights(problem.all_train_labels(), num_classes);
  if (weights.size() != num_classes) throw ConfigError("class_weights must have K entries");
  report.class_weights = weights;
  report.head_kind = head.kind();

  const AdamHyper filter_hyper{config.learning_rate, 0.9, 0.999, 1e-8, config.filter_weight_decay};
  const AdamHyper head_hyper{config.learning_rate, 0.9, 0.999, 1e-8, config.head_weight_decay};
  VectorXd filter_params = problem.filter_parameters();
  VectorXd head_params = head.parameters();
  AdamState filter_state = AdamState::zeros(filter_params.size());
  AdamState head_state = AdamState::zeros(head_params.size());

  VectorXd best_filters = filter_params;
  VectorXd best_head = head_params;
  double best_miou = -std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;

  const Index n_images = problem.num_train_images();
  std::vector<Index> order(static_cast<std::size_t>(n_images));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    Rng shuffle(config.seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
    for (Index i = n_images - 1; i > 0; --i) {
      const auto j = static_cast<Index>(shuffle.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    ConfusionMatrix train_cm(num_classes);
    double loss_sum = 0.0;
    int batches = 0;
    int pending = 0;
    VectorXd filter_acc = VectorXd::Zero(filter_params.size());
    VectorXd head_acc = VectorXd::Zero(head_params.size());

    for (Index start = 0; start < n_images; start += config.batch_size) {
      const Index count = std::min<Index>(config.batch_size, n_images - start);
      const std::span<const Index> batch(order.data() + start, static_cast<std::size_t>(count));
      BatchOutput out = problem.run_batch(batch, head, weights);
      if (!std::isfinite(out.seg_loss)) {
        throw DivergedError("segmentation loss became non-finite in epoch " + std::to_string(epoch), epoch);
      }
      loss_sum += out.seg_loss;
      ++batches;
      train_cm.accumulate(out.predictions, out.labels);
      if (problem.learns_filters()) filter_acc += out.filter_grad;
      head_acc += out.head_grad;
      ++pending;

      if (pending == config.accumulate || start + count >= n_images) {
        if (problem.learns_filters()) {
          filter_acc /= static_cast<double>(pending);
          adam_step(filter_params, filter_acc, filter_state, filter_hyper);
          problem.set_filter_parameters(filter_params);
        }
        head_acc /= static_cast<double>(pending);
        adam_step(head_params, head_acc, head_state, head_hyper);
        head.set_parameters(head_params);
        filter_acc.setZero();
        head_acc.setZero();
        pending = 0;
      }
    }
    if (!filter_params.allFinite() || !head_params.allFinite()) {
      throw DivergedError("parameters became non-finite in epoch " + std::to_string(epoch), epoch);
    }

    const ValOutput val = problem.run_validation(head, weights, num_classes);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.seg_loss = loss_sum / batches;
    rec.reg = problem.current_reg();
    rec.train_miou = miou_or_zero(train_cm);
    rec.val_miou = miou_or_zero(val.confusion);
    rec.val_loss = val.loss;
    if (!std::isfinite(rec.val_loss)) {
      throw DivergedError("validation loss became non-finite in epoch " + std::to_string(epoch), epoch);
    }
    if (problem.learns_filters()) {
      const MatrixXd c = problem.centroids();
      rec.centroids_out_of_range = count_out_of_range(c);
      report.centroid_trajectory.push_back(c);
    }
    report.epochs.push_back(rec);

    const bool improved = rec.val_miou > best_miou || (rec.val_miou == best_miou && rec.val_loss < best_loss);
    if (improved) {
      best_miou = rec.val_miou;
      best_loss = rec.val_loss;
      best_filters = filter_params;
      best_head = head_params;
      report.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }

  problem.set_filter_parameters(best_filters);
  head.set_parameters(best_head);
  report.head_parameters = best_head;
}

Index common_num_classes(const std::vector<LabeledCube>& a, const std::vector<LabeledCube>& b) {
  const Index k = a.front().labels.num_classes;
  for (const auto* set : {&a, &b}) {
    for (const auto& item : *set) {
      if (item.labels.num_classes != k) throw ConfigError("all cubes must declare the same number of classes");
    }
  }
  if (k < 2) throw ConfigError("training needs at least two classes");
  return k;
}

}  // namespace

TrainReport train(const std::vector<LabeledCube>& train_set, const std::vector<LabeledCube>& val_set, Index filters,
                  Index peaks, const TrainConfig& config, std::optional<WavelengthRange<double>> range) {
  config.validate();
  if (train_set.empty() || val_set.empty()) throw ConfigError("training needs non-empty train and val splits");
  const CubeDims ref = train_set.front().cube.dims();
  const VectorXd& wavelengths = train_set.front().cube.wavelengths();
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& item : *set) {
      item.validate();
      if (item.cube.dims().batch < 1) throw ConfigError("cubes must hold at least one image");
      if (item.cube.dims().channels != ref.channels || item.cube.wavelengths() != wavelengths) {
        throw ConfigError("all cubes must share the same channel wavelengths");
      }
      if (item.cube.dims().height != ref.height || item.cube.dims().width != ref.width) {
        throw ConfigError("all cubes must share the same spatial size");
      }
    }
  }
  if (filters >= ref.channels) throw ConfigError("the filter count F must be smaller than the channel count C");
  const Index K = common_num_classes(train_set, val_set);
  const WavelengthRange<double> wr = range.value_or(WavelengthRange<double>{wavelengths[0], wavelengths[ref.channels - 1]});

  CubeProblem problem(train_set, val_set, init_filter_bank<double>(filters, peaks, wr, config.seed), config);
  auto head = make_head(config.head, filters, K, config.hidden_width, config.seed);
  TrainReport report;
  report.hidden_width = config.head == HeadKind::kMlp ? config.hidden_width : 0;
  run_training(problem, *head, K, config, report);
  report.filters = problem.filters();
  return report;
}

TrainReport train_head(const std::vector<FeatureImage>& train_set, const std::vector<FeatureImage>& val_set,
                       Index num_classes, const TrainConfig& config) {
  config.validate();
  if (train_set.empty() || val_set.empty()) throw ConfigError("training needs non-empty train and val splits");
  const Index F = train_set.front().features.cols();
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& img : *set) {
      if (img.features.cols() != F) throw DimensionError("feature images disagree in feature count");
      if (static_cast<Index>(img.labels.size()) != img.features.rows()) {
        throw DimensionError("feature image labels do not match its rows");
      }
    }
  }
  FeatureProblem problem(train_set, val_set);
  auto head = make_head(config.head, F, num_classes, config.hidden_width, config.seed);
  TrainReport report;
  report.hidden_width = config.head == HeadKind::kMlp ? config.hidden_width : 0;
  run_training(problem, *head, num_classes, config, report);
  return report;
}

}  // namespace lqe
