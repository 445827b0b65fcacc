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

#include "lqe/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace lqe {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

void dump_into(const Json& v, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        dump_into(item, depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool scalars = std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_primitive(); });
      if (scalars) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump_into(v[i], depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_into(v[i], depth + 1, out);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
      } else {
        std::string s = format_double(d);
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        out += s;
      }
      return;
    }
    default: out += v.dump();
  }
}

template <typename T>
T get_or(const Json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  return doc.at(key).get<T>();
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

Json vector_to_json(const VectorXd& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VectorXd vector_from_json(const Json& arr) {
  if (!arr.is_array()) throw ConfigError("expected a numeric array");
  VectorXd v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Index>(i)] = arr[i].get<double>();
  return v;
}

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

MatrixXd matrix_from_json(const Json& rows) {
  if (!rows.is_array() || rows.empty()) throw ConfigError("expected a non-empty array of rows");
  const auto cols = rows[0].size();
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ConfigError("ragged matrix rows");
    m.row(static_cast<Index>(r)) = vector_from_json(rows[r]).transpose();
  }
  return m;
}

Json bump_to_json(const Bump& b) { return Json{{"center_nm", b.center_nm}, {"width_nm", b.width_nm}, {"height", b.height}}; }

Bump bump_from_json(const Json& doc) {
  return {doc.at("center_nm").get<double>(), doc.at("width_nm").get<double>(), doc.at("height").get<double>()};
}

std::vector<Bump> bumps_from_json(const Json& arr) {
  std::vector<Bump> out;
  for (const auto& b : arr) out.push_back(bump_from_json(b));
  return out;
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  dump_into(value, 0, out);
  out += '\n';
  return out;
}

Json parse_json(const std::string& text) {
  return guarded("invalid JSON", [&] { return Json::parse(text); });
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return guarded(path.string().c_str(), [&] { return Json::parse(text); });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("short write to " + path.string());
}

Json filters_to_json(const FilterBankParams<double>& params) {
  Json filters = Json::array();
  for (Index f = 0; f < params.num_filters(); ++f) {
    Json peaks = Json::array();
    for (Index p = 0; p < params.peaks_per_filter(); ++p) {
      peaks.push_back(Json{{"c", params.centroid(f, p)},
                           {"log_bw", params.log_bandwidth(f, p)},
                           {"alpha", params.amplitude_logit(f, p)},
                           {"gamma", params.skewness(f, p)}});
    }
    filters.push_back(std::move(peaks));
  }
  return Json{{"range", {{"start_nm", params.range.start_nm}, {"end_nm", params.range.end_nm}}},
              {"filters", std::move(filters)}};
}

FilterBankParams<double> filters_from_json(const Json& doc) {
  return guarded("filter bank JSON", [&] {
    const auto& filters = doc.at("filters");
    if (!filters.is_array() || filters.empty() || !filters[0].is_array() || filters[0].empty()) {
      throw ConfigError("filter bank JSON needs at least one filter with one peak");
    }
    const auto F = static_cast<Index>(filters.size());
    const auto P = static_cast<Index>(filters[0].size());
    FilterBankParams<double> params;
    static_cast<PeakArrays<double>&>(params) = PeakArrays<double>::zeros(F, P);
    params.range = {doc.at("range").at("start_nm").get<double>(), doc.at("range").at("end_nm").get<double>()};
    for (Index f = 0; f < F; ++f) {
      const auto& peaks = filters[static_cast<std::size_t>(f)];
      if (static_cast<Index>(peaks.size()) != P) throw ConfigError("every filter must have the same peak count");
      for (Index p = 0; p < P; ++p) {
        const auto& pk = peaks[static_cast<std::size_t>(p)];
        params.centroid(f, p) = pk.at("c").get<double>();
        params.log_bandwidth(f, p) = pk.at("log_bw").get<double>();
        params.amplitude_logit(f, p) = pk.at("alpha").get<double>();
        params.skewness(f, p) = pk.at("gamma").get<double>();
      }
    }
    params.validate();
    if (!params.all_finite()) throw ConfigError("filter bank JSON contains non-finite parameters");
    return params;
  });
}

Json reg_config_to_json(const RegConfig& c) {
  return Json{{"r_max", c.r_max},
              {"d_min", c.d_min},
              {"beta_min", c.beta_min},
              {"beta_max", c.beta_max},
              {"lambda_reg", c.lambda_reg},
              {"use_dominance", c.use_dominance},
              {"use_separation", c.use_separation},
              {"use_bandwidth", c.use_bandwidth}};
}

RegConfig reg_config_from_json(const Json& doc) {
  return guarded("regularizer config", [&] {
    RegConfig c;
    c.r_max = get_or(doc, "r_max", c.r_max);
    c.d_min = get_or(doc, "d_min", c.d_min);
    c.beta_min = get_or(doc, "beta_min", c.beta_min);
    c.beta_max = get_or(doc, "beta_max", c.beta_max);
    c.lambda_reg = get_or(doc, "lambda_reg", c.lambda_reg);
    c.use_dominance = get_or(doc, "use_dominance", c.use_dominance);
    c.use_separation = get_or(doc, "use_separation", c.use_separation);
    c.use_bandwidth = get_or(doc, "use_bandwidth", c.use_bandwidth);
    c.validate();
    return c;
  });
}

Json train_config_to_json(const TrainConfig& c) {
  Json doc{{"learning_rate", c.learning_rate},
           {"max_epochs", c.max_epochs},
           {"patience", c.patience},
           {"batch_size", c.batch_size},
           {"accumulate", c.accumulate},
           {"seed", c.seed},
           {"reg", reg_config_to_json(c.reg)}};
  doc["class_weights"] = c.class_weights ? vector_to_json(*c.class_weights) : Json("inverse-frequency");
  doc["filter_weight_decay"] = c.filter_weight_decay;
  doc["head_weight_decay"] = c.head_weight_decay;
  doc["head"] = to_string(c.head);
  doc["hidden_width"] = c.hidden_width;
  doc["threads"] = c.threads;
  doc["deterministic"] = c.deterministic;
  return doc;
}

TrainConfig train_config_from_json(const Json& doc) {
  return guarded("training config", [&] {
    TrainConfig c;
    c.learning_rate = get_or(doc, "learning_rate", c.learning_rate);
    c.max_epochs = get_or(doc, "max_epochs", c.max_epochs);
    c.patience = get_or(doc, "patience", c.patience);
    c.batch_size = get_or(doc, "batch_size", c.batch_size);
    c.accumulate = get_or(doc, "accumulate", c.accumulate);
    c.seed = get_or(doc, "seed", c.seed);
    if (doc.contains("reg")) c.reg = reg_config_from_json(doc.at("reg"));
    if (doc.contains("class_weights")) {
      const auto& w = doc.at("class_weights");
      if (w.is_string()) {
        if (w.get<std::string>() != "inverse-frequency") {
          throw ConfigError("class_weights must be \"inverse-frequency\" or an array");
        }
      } else {
        c.class_weights = vector_from_json(w);
      }
    }
    c.filter_weight_decay = get_or(doc, "filter_weight_decay", c.filter_weight_decay);
    c.head_weight_decay = get_or(doc, "head_weight_decay", c.head_weight_decay);
    if (doc.contains("head")) c.head = head_kind_from_string(doc.at("head").get<std::string>());
    c.hidden_width = get_or(doc, "hidden_width", c.hidden_width);
    c.threads = get_or(doc, "threads", c.threads);
    c.deterministic = get_or(doc, "deterministic", c.deterministic);
    c.validate();
    return c;
  });
}

TrainJob train_job_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  return guarded("training job", [&] {
    TrainJob job;
    const auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    job.train_path = resolve(doc.at("data").at("train").get<std::string>());
    job.val_path = resolve(doc.at("data").at("val").get<std::string>());
    job.filters = get_or<Index>(doc, "filters", job.filters);
    job.peaks = get_or<Index>(doc, "peaks", job.peaks);
    if (job.filters < 1 || job.peaks < 1) throw ConfigError("filters and peaks must be >= 1");
    if (doc.contains("range")) {
      job.range = WavelengthRange<double>{doc.at("range").at("start_nm").get<double>(),
                                          doc.at("range").at("end_nm").get<double>()};
      job.range->validate();
    }
    job.write_predictions = get_or(doc, "write_predictions", job.write_predictions);
    job.config = train_config_from_json(doc);
    return job;
  });
}

Json report_to_json(const TrainReport& r) {
  Json epochs = Json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back(Json{{"epoch", e.epoch},
                          {"seg_loss", e.seg_loss},
                          {"L_dom", e.reg.dominance},
                          {"L_sep", e.reg.separation},
                          {"L_bw", e.reg.bandwidth},
                          {"L_reg", e.reg.total},
                          {"train_miou", e.train_miou},
                          {"val_miou", e.val_miou},
                          {"val_loss", e.val_loss},
                          {"centroids_out_of_range", e.centroids_out_of_range}});
  }
  Json doc{{"best_epoch", r.best_epoch},
           {"stopped_early", r.stopped_early},
           {"epochs_run", static_cast<int>(r.epochs.size())}};
  if (!r.epochs.empty()) doc["best_val_miou"] = r.best().val_miou;
  doc["filters"] = r.filters ? filters_to_json(*r.filters) : Json(nullptr);
  doc["head"] = Json{{"kind", to_string(r.head_kind)},
                     {"hidden_width", r.hidden_width},
                     {"parameters", vector_to_json(r.head_parameters)}};
  doc["class_weights"] = vector_to_json(r.class_weights);
  doc["epochs"] = std::move(epochs);
  return doc;
}

std::string epochs_csv(const TrainReport& r) {
  std::string text = "epoch,seg_loss,L_dom,L_sep,L_bw,train_miou,val_miou\n";
  for (const auto& e : r.epochs) {
    text += std::to_string(e.epoch);
    for (double v : {e.seg_loss, e.reg.dominance, e.reg.separation, e.reg.bandwidth, e.train_miou, e.val_miou}) {
      text += ',' + format_double(v);
    }
    text += '\n';
  }
  return text;
}

std::string centroids_csv(const TrainReport& r) {
  std::string text = "epoch,filter,peak,centroid\n";
  for (std::size_t i = 0; i < r.centroid_trajectory.size(); ++i) {
    const MatrixXd& c = r.centroid_trajectory[i];
    for (Index f = 0; f < c.rows(); ++f) {
      for (Index p = 0; p < c.cols(); ++p) {
        text += std::to_string(i + 1) + ',' + std::to_string(f + 1) + ',' + std::to_string(p + 1) + ',' +
                format_double(c(f, p)) + '\n';
      }
    }
  }
  return text;
}

Json synth_spec_to_json(const SynthSpec& s) {
  Json classes = Json::array();
  for (const auto& cls : s.classes) {
    Json bumps = Json::array();
    for (const auto& b : cls) bumps.push_back(bump_to_json(b));
    classes.push_back(std::move(bumps));
  }
  Json background = Json::array();
  for (const auto& b : s.background) background.push_back(bump_to_json(b));
  Json nuisance = Json::array();
  for (const auto& n : s.nuisance) {
    nuisance.push_back(Json{{"center_nm", n.center_nm}, {"width_nm", n.width_nm}, {"sigma", n.sigma}});
  }
  Json planted = Json::array();
  for (double c : s.planted_centers_nm) planted.push_back(c);
  return Json{{"wavelengths_nm", vector_to_json(s.wavelengths_nm)},
              {"background", std::move(background)},
              {"classes", std::move(classes)},
              {"planted_centers_nm", std::move(planted)},
              {"nuisance", std::move(nuisance)},
              {"noise_sigma", s.noise_sigma},
              {"blobs_per_image", s.blobs_per_image},
              {"height", s.height},
              {"width", s.width},
              {"train_images", s.train_images},
              {"val_images", s.val_images},
              {"seed", s.seed},
              {"threads", s.threads}};
}

SynthSpec synth_spec_from_json(const Json& doc) {
  return guarded("synthetic spec", [&] {
    SynthSpec s;
    if (doc.contains("wavelengths_nm")) {
      s.wavelengths_nm = vector_from_json(doc.at("wavelengths_nm"));
    } else if (doc.contains("grid")) {
      const auto& g = doc.at("grid");
      s.wavelengths_nm =
          wavelength_grid(g.at("count").get<Index>(), g.at("start_nm").get<double>(), g.at("end_nm").get<double>());
    } else {
      const auto preset = get_or<std::string>(doc, "preset", "hyko");
      if (preset == "hyko") {
        s.wavelengths_nm = hyko_wavelengths();
      } else if (preset == "hsidrive") {
        s.wavelengths_nm = hsi_drive_wavelengths();
      } else {
        throw ConfigError("unknown wavelength preset '" + preset + "' (expected hyko or hsidrive)");
      }
    }
    if (doc.contains("background")) s.background = bumps_from_json(doc.at("background"));
    for (const auto& cls : doc.at("classes")) s.classes.push_back(bumps_from_json(cls));
    if (doc.contains("planted_centers_nm")) {
      s.planted_centers_nm = doc.at("planted_centers_nm").get<std::vector<double>>();
    }
    if (doc.contains("nuisance")) {
      for (const auto& n : doc.at("nuisance")) {
        s.nuisance.push_back(
            {n.at("center_nm").get<double>(), n.at("width_nm").get<double>(), n.at("sigma").get<double>()});
      }
    }
    s.noise_sigma = get_or(doc, "noise_sigma", s.noise_sigma);
    s.blobs_per_image = get_or(doc, "blobs_per_image", s.blobs_per_image);
    s.height = get_or(doc, "height", s.height);
    s.width = get_or(doc, "width", s.width);
    s.train_images = get_or(doc, "train_images", s.train_images);
    s.val_images = get_or(doc, "val_images", s.val_images);
    s.seed = get_or(doc, "seed", s.seed);
    s.threads = get_or(doc, "threads", s.threads);
    s.validate();
    return s;
  });
}

Json pipeline_to_json(const ClassicalPipeline& p) {
  const LinearProjection& proj = p.projection;
  Json doc{{"kind", to_string(proj.kind)},
           {"mean", vector_to_json(p.stats.mean)},
           {"std", vector_to_json(p.stats.std)},
           {"components", matrix_to_json(proj.components)},
           {"shift", vector_to_json(proj.shift)}};
  if (proj.kind == ProjectionKind::kPca) {
    doc["explained_variance"] = vector_to_json(proj.explained_variance);
  } else {
    doc["iterations_run"] = proj.iterations_run;
    doc["final_residual"] = proj.final_residual;
  }
  return doc;
}

ClassicalPipeline pipeline_from_json(const Json& doc) {
  return guarded("pipeline JSON", [&] {
    ClassicalPipeline p;
    p.projection.kind = projection_kind_from_string(doc.at("kind").get<std::string>());
    p.stats.mean = vector_from_json(doc.at("mean"));
    p.stats.std = vector_from_json(doc.at("std"));
    p.projection.components = matrix_from_json(doc.at("components"));
    p.projection.shift = vector_from_json(doc.at("shift"));
    if (doc.contains("explained_variance")) p.projection.explained_variance = vector_from_json(doc.at("explained_variance"));
    p.projection.iterations_run = get_or(doc, "iterations_run", 0);
    p.projection.final_residual = get_or(doc, "final_residual", 0.0);
    const Index C = p.stats.mean.size();
    if (p.stats.std.size() != C || p.projection.components.cols() != C || p.projection.shift.size() != C) {
      throw ConfigError("pipeline JSON has inconsistent channel counts");
    }
    return p;
  });
}

Json metrics_to_json(const SegMetrics& m) {
  return Json{{"miou", m.miou},
              {"mf1", m.mf1},
              {"kappa", m.kappa},
              {"accuracy", m.accuracy},
              {"specificity", m.specificity},
              {"per_class_iou", vector_to_json(m.per_class_iou)},
              {"per_class_f1", vector_to_json(m.per_class_f1)},
              {"per_class_specificity", vector_to_json(m.per_class_specificity)}};
}

}  // namespace lqe
