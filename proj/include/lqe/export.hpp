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

#include <filesystem>
#include <optional>
#include <string>

#include "lqe/common.hpp"
#include "lqe/filter_bank.hpp"

namespace lqe {

struct FilterCurves {
  VectorXd wavelengths_nm;  // G sample points
  MatrixXd responses;       // F x G
  bool dense = false;
};

/// Filter responses sampled for plotting.
///
/// Without `dense_count` the curves are the filter-bank weights on the dataset
/// channels. With it, they are sampled on `dense_count` evenly spaced points
/// across the filter range, but each row is still divided by its maximum over
/// the dataset channels, so dense values may exceed 1 between channels.
FilterCurves filter_curves(const FilterBankParams<double>& params, const VectorXd& channel_wavelengths_nm,
                           std::optional<Index> dense_count = std::nullopt);

/// CSV text: an optional "# ..." comment line for dense grids, then the header
/// "wavelength_nm,filter_1,...,filter_F" and one row per sample point.
std::string filter_curves_csv(const FilterCurves& curves);

void export_filters(const FilterBankParams<double>& params, const VectorXd& channel_wavelengths_nm,
                    std::optional<Index> dense_count, const std::filesystem::path& path);

}  // namespace lqe
