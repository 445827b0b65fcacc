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

#include "lqe/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lqe {

void ConfusionMatrix::accumulate(std::span<const std::uint16_t> predictions, std::span<const std::uint16_t> labels,
                                 std::uint16_t ignore) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("prediction and label maps differ in size");
  }
  const auto K = static_cast<std::uint32_t>(num_classes());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == ignore) continue;
    if (labels[i] >= K || predictions[i] >= K) {
      throw DataError("class id out of range at pixel " + std::to_string(i) + " (truth " +
                      std::to_string(labels[i]) + ", prediction " + std::to_string(predictions[i]) + ", K=" +
                      std::to_string(K) + ")");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == ignore) continue;
    ++counts_(labels[i], predictions[i]);
  }
}

void ConfusionMatrix::add(Index truth, Index predicted, std::int64_t count) {
  if (truth < 0 || truth >= num_classes() || predicted < 0 || predicted >= num_classes()) {
    throw DataError("class id out of range");
  }
  if (count < 0) throw DataError("negative count");
  counts_(truth, predicted) += count;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes() != num_classes()) throw DimensionError("confusion matrices differ in K");
  counts_ += other.counts_;
  return *this;
}

ConfusionMatrix ConfusionMatrix::from_counts(MatrixXi64 counts) {
  if (counts.rows() != counts.cols()) throw DimensionError("confusion matrix must be square");
  if ((counts.array() < 0).any()) throw DataError("confusion counts must be non-negative");
  ConfusionMatrix cm;
  cm.counts_ = std::move(counts);
  return cm;
}

SegMetrics compute_metrics(const ConfusionMatrix& cm) {
  const Index K = cm.num_classes();
  const std::int64_t total_count = cm.total();
  if (K == 0 || total_count <= 0) throw DataError("cannot compute metrics on an empty confusion matrix");
  const auto& n = cm.counts();
  const double total = static_cast<double>(total_count);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SegMetrics m;
  m.per_class_iou = VectorXd::Constant(K, nan);
  m.per_class_f1 = VectorXd::Constant(K, nan);
  m.per_class_specificity = VectorXd::Constant(K, nan);
  m.present.assign(static_cast<std::size_t>(K), false);

  double trace = 0.0, chance = 0.0;
  double iou_sum = 0.0, f1_sum = 0.0, spec_sum = 0.0;
  int present = 0, spec_count = 0;
  for (Index k = 0; k < K; ++k) {
    const double tp = static_cast<double>(n(k, k));
    const double row = static_cast<double>(n.row(k).sum());
    const double col = static_cast<double>(n.col(k).sum());
    const double fn = row - tp;
    const double fp = col - tp;
    const double tn = total - tp - fn - fp;
    trace += tp;
    chance += row * col;
    if (row <= 0.0) continue;
    m.present[static_cast<std::size_t>(k)] = true;
    ++present;
    m.per_class_iou[k] = 100.0 * tp / (tp + fp + fn);
    m.per_class_f1[k] = 100.0 * 2.0 * tp / (2.0 * tp + fp + fn);
    iou_sum += m.per_class_iou[k];
    f1_sum += m.per_class_f1[k];
    if (tn + fp > 0.0) {
      m.per_class_specificity[k] = 100.0 * tn / (tn + fp);
      spec_sum += m.per_class_specificity[k];
      ++spec_count;
    }
  }
  m.miou = iou_sum / present;
  m.mf1 = f1_sum / present;
  m.specificity = spec_count > 0 ? spec_sum / spec_count : 100.0;

  const double p_o = trace / total;
  const double p_e = chance / (total * total);
  m.accuracy = 100.0 * p_o;
  if (p_o == 1.0) {
    m.kappa = 100.0;
  } else if (p_e == 1.0) {
    m.kappa = 0.0;
  } else {
    m.kappa = 100.0 * (p_o - p_e) / (1.0 - p_e);
  }
  return m;
}

std::string format_metrics_table(const SegMetrics& m) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %10s\n", "metric", "value");
  out << line;
  const auto row = [&](const char* name, double v) {
    std::snprintf(line, sizeof line, "%-12s %10.2f\n", name, v);
    out << line;
  };
  row("mIoU", m.miou);
  row("mF1", m.mf1);
  row("Kappa", m.kappa);
  row("Accuracy", m.accuracy);
  row("mSpecificity", m.specificity);
  out << "\n";
  std::snprintf(line, sizeof line, "%-12s %10s %10s\n", "class", "IoU", "F1");
  out << line;
  for (Index k = 0; k < m.per_class_iou.size(); ++k) {
    if (!m.present[static_cast<std::size_t>(k)]) {
      std::snprintf(line, sizeof line, "%-12lld %10s %10s\n", static_cast<long long>(k), "-", "-");
    } else {
      std::snprintf(line, sizeof line, "%-12lld %10.2f %10.2f\n", static_cast<long long>(k), m.per_class_iou[k],
                    m.per_class_f1[k]);
    }
    out << line;
  }
  return out.str();
}

}  // namespace lqe
