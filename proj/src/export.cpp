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

#include "lqe/export.hpp"

#include <cstdio>
#include <fstream>

#include "lqe/serialize.hpp"

namespace lqe {

FilterCurves filter_curves(const FilterBankParams<double>& params, const VectorXd& channel_wavelengths_nm,
                           std::optional<Index> dense_count) {
  params.validate();
  const auto on_channels = evaluate_on_wavelengths<double>(params, channel_wavelengths_nm);
  FilterCurves out;
  if (!dense_count) {
    out.wavelengths_nm = channel_wavelengths_nm;
    out.responses = on_channels.weights;
    return out;
  }
  if (*dense_count < 2) throw ConfigError("dense grid needs at least 2 points");
  out.dense = true;
  out.wavelengths_nm = VectorXd::LinSpaced(*dense_count, params.range.start_nm, params.range.end_nm);
  const auto dense = evaluate_on_wavelengths<double>(params, out.wavelengths_nm);
  const Index F = params.num_filters(), P = params.peaks_per_filter();
  out.responses.resize(F, *dense_count);
  for (Index f = 0; f < F; ++f) {
    out.responses.row(f) = dense.per_peak.middleRows(f * P, P).colwise().sum() / (on_channels.row_max[f] + kEpsilon);
  }
  return out;
}

std::string filter_curves_csv(const FilterCurves& curves) {
  std::string text;
  if (curves.dense) {
    text += "# dense grid; each filter is normalized by its maximum over the dataset channels\n";
  }
  text += "wavelength_nm";
  for (Index f = 0; f < curves.responses.rows(); ++f) text += ",filter_" + std::to_string(f + 1);
  text += '\n';
  for (Index g = 0; g < curves.wavelengths_nm.size(); ++g) {
    text += format_double(curves.wavelengths_nm[g]);
    for (Index f = 0; f < curves.responses.rows(); ++f) text += ',' + format_double(curves.responses(f, g));
    text += '\n';
  }
  return text;
}

void export_filters(const FilterBankParams<double>& params, const VectorXd& channel_wavelengths_nm,
                    std::optional<Index> dense_count, const std::filesystem::path& path) {
  write_text(path, filter_curves_csv(filter_curves(params, channel_wavelengths_nm, dense_count)));
}

}  // namespace lqe
