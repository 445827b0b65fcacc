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

// JSON and CSV encodings of configs, filter banks, reports and pipelines.
// Every floating-point value is written with 17 significant digits, so
// doubles survive a write/read cycle unchanged. Malformed documents raise
// ConfigError.

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "lqe/classical_dr.hpp"
#include "lqe/filter_bank.hpp"
#include "lqe/metrics.hpp"
#include "lqe/synthetic.hpp"
#include "lqe/trainer.hpp"

namespace lqe {

using Json = nlohmann::ordered_json;

/// "%.17g"; non-finite values print as nan, inf, -inf.
std::string format_double(double value);

/// Two-space indented dump; NaN and infinities become null.
std::string dump_json(const Json& value);

Json parse_json(const std::string& text);
Json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// {"range": {"start_nm", "end_nm"}, "filters": [[{"c","log_bw","alpha","gamma"}, ...P], ...F]}
Json filters_to_json(const FilterBankParams<double>& params);
FilterBankParams<double> filters_from_json(const Json& doc);

Json reg_config_to_json(const RegConfig& config);
/// Missing keys keep their defaults.
RegConfig reg_config_from_json(const Json& doc);

Json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& doc);

/// Everything the `train` command needs: data locations, filter-bank shape,
/// and the training config.
struct TrainJob {
  std::filesystem::path train_path;
  std::filesystem::path val_path;
  Index filters = 2;
  Index peaks = 1;
  std::optional<WavelengthRange<double>> range;
  bool write_predictions = false;
  TrainConfig config;
};

/// Relative data paths are resolved against `base_dir`.
TrainJob train_job_from_json(const Json& doc, const std::filesystem::path& base_dir);

Json report_to_json(const TrainReport& report);
/// epoch,seg_loss,L_dom,L_sep,L_bw,train_miou,val_miou
std::string epochs_csv(const TrainReport& report);
/// epoch,filter,peak,centroid with 1-based filter and peak indices.
std::string centroids_csv(const TrainReport& report);

Json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const Json& doc);

Json pipeline_to_json(const ClassicalPipeline& pipeline);
ClassicalPipeline pipeline_from_json(const Json& doc);

Json metrics_to_json(const SegMetrics& metrics);

}  // namespace lqe
