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
 Learnable multi-peak spectral response filters.

 Every filter f is a sum of P asymmetric Gaussian peaks evaluated on a
 normalized wavelength axis t in [0, 1]. Peak p of filter f carries four raw
 parameters:

   centroid         c          peak position
   log_bandwidth    l          beta = exp(l)
   amplitude_logit  alpha      a = sigmoid(alpha)
   skewness         gamma      s = 0.5 tanh(gamma)

 and responds with

   x      = (t - c) / beta
   x_skew = x (1 + s tanh(x))
   g      = a exp(-x_skew^2 / 2)

 The filter row is the sum over peaks, divided by (max over channels + eps).
*/

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lqe/common.hpp"
#include "lqe/rng.hpp"

namespace lqe {

template <typename Scalar>
struct WavelengthRange {
  Scalar start_nm{};
  Scalar end_nm{};

  void validate() const {
    if (!(std::isfinite(static_cast<double>(start_nm)) && std::isfinite(static_cast<double>(end_nm))) ||
        !(end_nm > start_nm)) {
      std::ostringstream msg;
      msg << "wavelength range requires end > start, got [" << start_nm << ", " << end_nm << "]";
      throw ConfigError(msg.str());
    }
  }

  Scalar span() const { return end_nm - start_nm; }
};

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// Raw and derived parameters of a single peak.
template <typename Scalar>
struct PeakParams {
  Scalar centroid{};
  Scalar log_bandwidth{};
  Scalar amplitude_logit{};
  Scalar skewness_raw{};

  Scalar bandwidth() const { return std::exp(log_bandwidth); }
  Scalar amplitude() const { return sigmoid(amplitude_logit); }
  Scalar skew() const { return Scalar(0.5) * std::tanh(skewness_raw); }
};

/// Four F x P tables, one per raw peak parameter. Used both for the
/// parameters themselves and for their gradients.
template <typename Scalar>
struct PeakArrays {
  MatrixX<Scalar> centroid;
  MatrixX<Scalar> log_bandwidth;
  MatrixX<Scalar> amplitude_logit;
  MatrixX<Scalar> skewness;

  static constexpr Index kPerPeak = 4;

  static PeakArrays zeros(Index filters, Index peaks) {
    PeakArrays out;
    out.centroid = MatrixX<Scalar>::Zero(filters, peaks);
    out.log_bandwidth = MatrixX<Scalar>::Zero(filters, peaks);
    out.amplitude_logit = MatrixX<Scalar>::Zero(filters, peaks);
    out.skewness = MatrixX<Scalar>::Zero(filters, peaks);
    return out;
  }

  Index num_filters() const { return centroid.rows(); }
  Index peaks_per_filter() const { return centroid.cols(); }
  Index num_parameters() const { return kPerPeak * num_filters() * peaks_per_filter(); }

  PeakParams<Scalar> peak(Index f, Index p) const {
    return {centroid(f, p), log_bandwidth(f, p), amplitude_logit(f, p), skewness(f, p)};
  }

  /// Flat layout: ((f * P + p) * 4 + k) with k = centroid, log_bandwidth,
  /// amplitude_logit, skewness.
  VectorX<Scalar> flatten() const {
    const Index F = num_filters(), P = peaks_per_filter();
    VectorX<Scalar> flat(num_parameters());
    for (Index f = 0; f < F; ++f) {
      for (Index p = 0; p < P; ++p) {
        const Index base = (f * P + p) * kPerPeak;
        flat[base + 0] = centroid(f, p);
        flat[base + 1] = log_bandwidth(f, p);
        flat[base + 2] = amplitude_logit(f, p);
        flat[base + 3] = skewness(f, p);
      }
    }
    return flat;
  }

  void assign_flat(const Eigen::Ref<const VectorX<Scalar>>& flat) {
    if (flat.size() != num_parameters()) {
      throw DimensionError("flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                           std::to_string(num_parameters()));
    }
    const Index F = num_filters(), P = peaks_per_filter();
    for (Index f = 0; f < F; ++f) {
      for (Index p = 0; p < P; ++p) {
        const Index base = (f * P + p) * kPerPeak;
        centroid(f, p) = flat[base + 0];
        log_bandwidth(f, p) = flat[base + 1];
        amplitude_logit(f, p) = flat[base + 2];
        skewness(f, p) = flat[base + 3];
      }
    }
  }

  PeakArrays& operator+=(const PeakArrays& other) {
    centroid += other.centroid;
    log_bandwidth += other.log_bandwidth;
    amplitude_logit += other.amplitude_logit;
    skewness += other.skewness;
    return *this;
  }

  PeakArrays& operator*=(Scalar k) {
    centroid *= k;
    log_bandwidth *= k;
    amplitude_logit *= k;
    skewness *= k;
    return *this;
  }

  friend PeakArrays operator+(PeakArrays a, const PeakArrays& b) { return a += b; }

  bool all_finite() const {
    return centroid.allFinite() && log_bandwidth.allFinite() && amplitude_logit.allFinite() && skewness.allFinite();
  }
};

template <typename Scalar>
using ParamGradients = PeakArrays<Scalar>;

template <typename Scalar>
struct FilterBankParams : PeakArrays<Scalar> {
  WavelengthRange<Scalar> range;

  void validate() const {
    range.validate();
    if (this->num_filters() < 1 || this->peaks_per_filter() < 1) {
      throw ConfigError("filter bank needs F >= 1 and P >= 1");
    }
    if (this->log_bandwidth.rows() != this->num_filters() || this->amplitude_logit.rows() != this->num_filters() ||
        this->skewness.rows() != this->num_filters() || this->log_bandwidth.cols() != this->peaks_per_filter() ||
        this->amplitude_logit.cols() != this->peaks_per_filter() || this->skewness.cols() != this->peaks_per_filter()) {
      throw DimensionError("filter bank parameter tables disagree in shape");
    }
  }
};

/// Maps channel wavelengths (nm) onto [0, 1].
template <typename Scalar>
VectorX<Scalar> normalize_wavelengths(const Eigen::Ref<const VectorX<Scalar>>& wavelengths_nm,
                                      const WavelengthRange<Scalar>& range) {
  range.validate();
  VectorX<Scalar> out(wavelengths_nm.size());
  for (Index c = 0; c < wavelengths_nm.size(); ++c) {
    const Scalar lambda = wavelengths_nm[c];
    if (!(lambda >= range.start_nm && lambda <= range.end_nm)) {
      std::ostringstream msg;
      msg << "channel " << c << " wavelength " << lambda << " nm outside range [" << range.start_nm << ", "
          << range.end_nm << "]";
      throw RangeError(msg.str(), c);
    }
    out[c] = (lambda - range.start_nm) / range.span();
  }
  return out;
}

/// Random initial filter bank. A pure function of its arguments.
///
/// Draw order per filter f, peak p (stream `seed`): centroid uniform, centroid
/// noise normal, bandwidth uniform, amplitude normal.
template <typename Scalar = double>
FilterBankParams<Scalar> init_filter_bank(Index filters, Index peaks, const WavelengthRange<Scalar>& range,
                                          std::uint64_t seed) {
  if (filters < 1 || peaks < 1) {
    throw ConfigError("init_filter_bank needs F >= 1 and P >= 1, got F=" + std::to_string(filters) +
                      " P=" + std::to_string(peaks));
  }
  range.validate();
  FilterBankParams<Scalar> params;
  static_cast<PeakArrays<Scalar>&>(params) = PeakArrays<Scalar>::zeros(filters, peaks);
  params.range = range;

  Rng rng(seed);
  for (Index f = 0; f < filters; ++f) {
    for (Index p = 0; p < peaks; ++p) {
      double c = rng.uniform(0.1, 0.9);
      c += rng.normal(0.0, 0.05);
      params.centroid(f, p) = static_cast<Scalar>(std::clamp(c, 0.0, 1.0));
      params.log_bandwidth(f, p) = static_cast<Scalar>(std::log(0.05 + 0.02 * rng.uniform()));
      params.amplitude_logit(f, p) = static_cast<Scalar>(rng.normal(0.0, 0.5));
      params.skewness(f, p) = Scalar(0);
    }
  }
  return params;
}

/// Intermediate values of one peak at one wavelength; the backward pass
/// reuses them.
template <typename Scalar>
struct PeakEval {
  Scalar x;
  Scalar tanh_x;
  Scalar x_skew;
  Scalar response;
};

template <typename Scalar>
PeakEval<Scalar> eval_peak(Scalar centroid, Scalar bandwidth, Scalar amplitude, Scalar skew, Scalar lambda_norm) {
  PeakEval<Scalar> e;
  e.x = (lambda_norm - centroid) / bandwidth;
  e.tanh_x = std::tanh(e.x);
  e.x_skew = e.x * (Scalar(1) + skew * e.tanh_x);
  e.response = amplitude * std::exp(Scalar(-0.5) * e.x_skew * e.x_skew);
  return e;
}

template <typename Scalar>
Scalar peak_response(const PeakParams<Scalar>& peak, Scalar lambda_norm) {
  return eval_peak(peak.centroid, peak.bandwidth(), peak.amplitude(), peak.skew(), lambda_norm).response;
}

/// Evaluated filter bank on a fixed channel grid, with the values the
/// backward pass needs.
template <typename Scalar>
struct FilterResponse {
  MatrixX<Scalar> weights;             // F x C, Q_f(t_c)
  MatrixX<Scalar> per_peak;            // (F*P) x C, row f*P + p
  VectorX<Scalar> row_max;             // F, pre-normalization maximum
  Eigen::VectorXi row_argmax;          // F, first channel attaining row_max
  VectorX<Scalar> normalized_wavelengths;  // C

  // Derived per-peak values, F x P.
  MatrixX<Scalar> centroid;
  MatrixX<Scalar> bandwidth;
  MatrixX<Scalar> amplitude;
  MatrixX<Scalar> skew;
  MatrixX<Scalar> skewness_raw;

  Index num_filters() const { return weights.rows(); }
  Index num_channels() const { return weights.cols(); }
  Index peaks_per_filter() const { return centroid.cols(); }
};

template <typename Scalar>
FilterResponse<Scalar> evaluate_filter_bank(const PeakArrays<Scalar>& params,
                                            const Eigen::Ref<const VectorX<Scalar>>& lambda_norm) {
  const Index F = params.num_filters();
  const Index P = params.peaks_per_filter();
  const Index C = lambda_norm.size();
  if (C < 1) throw DimensionError("evaluate_filter_bank needs at least one channel");

  FilterResponse<Scalar> r;
  r.normalized_wavelengths = lambda_norm;
  r.centroid = params.centroid;
  r.bandwidth = params.log_bandwidth.array().exp().matrix();
  r.amplitude = params.amplitude_logit.unaryExpr([](Scalar z) { return sigmoid(z); });
  r.skew = (Scalar(0.5) * params.skewness.array().tanh()).matrix();
  r.skewness_raw = params.skewness;
  r.per_peak.resize(F * P, C);
  r.weights.resize(F, C);
  r.row_max.resize(F);
  r.row_argmax.resize(F);

  for (Index f = 0; f < F; ++f) {
    for (Index p = 0; p < P; ++p) {
      for (Index c = 0; c < C; ++c) {
        r.per_peak(f * P + p, c) =
            eval_peak(r.centroid(f, p), r.bandwidth(f, p), r.amplitude(f, p), r.skew(f, p), lambda_norm[c]).response;
      }
    }
    const auto summed = r.per_peak.middleRows(f * P, P).colwise().sum();
    Index argmax = 0;
    for (Index c = 1; c < C; ++c) {
      if (summed[c] > summed[argmax]) argmax = c;
    }
    r.row_argmax[f] = static_cast<int>(argmax);
    r.row_max[f] = summed[argmax];
    r.weights.row(f) = summed / (summed[argmax] + Scalar(kEpsilon));
  }
  return r;
}

/// Same as evaluate_filter_bank, starting from channel wavelengths in nm.
template <typename Scalar>
FilterResponse<Scalar> evaluate_on_wavelengths(const FilterBankParams<Scalar>& params,
                                               const Eigen::Ref<const VectorX<Scalar>>& wavelengths_nm) {
  const VectorX<Scalar> t = normalize_wavelengths<Scalar>(wavelengths_nm, params.range);
  return evaluate_filter_bank<Scalar>(params, t);
}

/// Index of the largest-amplitude peak of filter f; ties go to the lowest index.
template <typename Scalar>
Index dominant_peak(const PeakArrays<Scalar>& params, Index f) {
  Index best = 0;
  for (Index p = 1; p < params.peaks_per_filter(); ++p) {
    if (params.amplitude_logit(f, p) > params.amplitude_logit(f, best)) best = p;
  }
  return best;
}

/// Centroid of each filter's dominant peak.
template <typename Scalar>
VectorX<Scalar> dominant_centroids(const PeakArrays<Scalar>& params) {
  VectorX<Scalar> out(params.num_filters());
  for (Index f = 0; f < params.num_filters(); ++f) out[f] = params.centroid(f, dominant_peak(params, f));
  return out;
}

}  // namespace lqe
