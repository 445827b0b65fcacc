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

#include <sstream>

#include "doctest.h"
#include "lqe/export.hpp"
#include "lqe/serialize.hpp"
#include "support.hpp"

using namespace lqe;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> fields(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("format_double round-trips and spells non-finite values") {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(testing::uniform_vector(gen, 1, -1.0, 1.0)[0], static_cast<int>(gen() % 200) - 100);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("JSON dump writes NaN as null and keeps doubles exact") {
  Json doc{{"a", 0.1}, {"b", std::nan("")}, {"c", 3.0}, {"d", Json::array({1, 2})}};
  const std::string text = dump_json(doc);
  CHECK(text.find("null") != std::string::npos);
  CHECK(text.find("\"c\": 3.0") != std::string::npos);
  const Json back = parse_json(text);
  CHECK(back.at("a").get<double>() == 0.1);
  CHECK(back.at("b").is_null());
  CHECK_THROWS_AS(parse_json("{not json"), ConfigError);
}

TEST_CASE("filter bank JSON is lossless") {
  std::mt19937_64 gen(2);
  auto params = testing::random_filters(gen, 3, 2);
  params.range = {470.0, 630.0};
  const auto back = filters_from_json(parse_json(dump_json(filters_to_json(params))));
  CHECK(back.flatten() == params.flatten());
  CHECK(back.range.start_nm == 470.0);
  CHECK(back.range.end_nm == 630.0);
  const Json doc = filters_to_json(params);
  CHECK(doc.at("filters").size() == 3);
  CHECK(doc.at("filters")[0].size() == 2);
  CHECK(doc.at("filters")[1][0].at("c").get<double>() == params.centroid(1, 0));
  Json bad = doc;
  bad["filters"][1].erase(1);
  CHECK_THROWS_AS(filters_from_json(bad), ConfigError);
  CHECK_THROWS_AS(filters_from_json(Json{{"filters", 3}}), ConfigError);
}

TEST_CASE("train config JSON round trip") {
  TrainConfig c;
  c.learning_rate = 0.0123;
  c.max_epochs = 77;
  c.patience = 9;
  c.head = HeadKind::kMlp;
  c.hidden_width = 12;
  c.reg.use_separation = false;
  c.reg.lambda_reg = 0.25;
  c.class_weights = VectorXd::Constant(3, 0.5);
  const TrainConfig back = train_config_from_json(parse_json(dump_json(train_config_to_json(c))));
  CHECK(back.learning_rate == 0.0123);
  CHECK(back.max_epochs == 77);
  CHECK(back.patience == 9);
  CHECK(back.head == HeadKind::kMlp);
  CHECK(back.hidden_width == 12);
  CHECK_FALSE(back.reg.use_separation);
  CHECK(back.reg.lambda_reg == 0.25);
  REQUIRE(back.class_weights.has_value());
  CHECK(*back.class_weights == VectorXd::Constant(3, 0.5));

  const TrainConfig defaults = train_config_from_json(Json::object());
  CHECK(defaults.learning_rate == 1e-4);
  CHECK_FALSE(defaults.class_weights.has_value());
  CHECK_THROWS_AS(train_config_from_json(Json{{"head", "transformer"}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(Json{{"max_epochs", "many"}}), ConfigError);
}

TEST_CASE("training job resolves relative data paths") {
  const Json doc{{"data", {{"train", "a/train.hypc"}, {"val", "/abs/val.hypc"}}},
                 {"filters", 3},
                 {"peaks", 2},
                 {"range", {{"start_nm", 470.0}, {"end_nm", 630.0}}},
                 {"learning_rate", 0.01}};
  const TrainJob job = train_job_from_json(doc, "/base");
  CHECK(job.train_path == std::filesystem::path("/base/a/train.hypc"));
  CHECK(job.val_path == std::filesystem::path("/abs/val.hypc"));
  CHECK(job.filters == 3);
  CHECK(job.peaks == 2);
  CHECK(job.range->end_nm == 630.0);
  CHECK(job.config.learning_rate == 0.01);
  CHECK_THROWS_AS(train_job_from_json(Json{{"filters", 2}}, "/base"), ConfigError);
}

TEST_CASE("synthetic spec JSON round trip") {
  const SynthSpec spec = testing::planted_spec(3);
  const SynthSpec back = synth_spec_from_json(parse_json(dump_json(synth_spec_to_json(spec))));
  CHECK(back.wavelengths_nm == spec.wavelengths_nm);
  CHECK(back.classes == spec.classes);
  CHECK(back.seed == 3);
  CHECK(back.nuisance.size() == 3);
  CHECK(gen_synthetic(back).train.cube.data() == gen_synthetic(spec).train.cube.data());

  Json preset = synth_spec_to_json(spec);
  preset.erase("wavelengths_nm");
  preset["preset"] = "hsidrive";
  CHECK(synth_spec_from_json(preset).wavelengths_nm == hsi_drive_wavelengths());
  preset["preset"] = "nowhere";
  CHECK_THROWS_AS(synth_spec_from_json(preset), ConfigError);
}

TEST_CASE("pipeline JSON round trip") {
  ClassicalPipeline p;
  p.stats = {VectorXd::LinSpaced(3, 0.1, 0.3), VectorXd::Constant(3, 0.7)};
  p.projection.kind = ProjectionKind::kNmf;
  p.projection.components = MatrixXd::Constant(2, 3, 0.25);
  p.projection.shift = VectorXd::Constant(3, 1.5);
  const auto back = pipeline_from_json(parse_json(dump_json(pipeline_to_json(p))));
  CHECK(back.projection.kind == ProjectionKind::kNmf);
  CHECK(back.projection.components == p.projection.components);
  CHECK(back.projection.shift == p.projection.shift);
  CHECK(back.stats.mean == p.stats.mean);
}

TEST_CASE("report CSVs have fixed headers and one-based indices") {
  TrainReport r;
  for (int e = 1; e <= 2; ++e) {
    EpochRecord rec;
    rec.epoch = e;
    rec.seg_loss = 1.0 / e;
    rec.val_miou = 50.0 + e;
    r.epochs.push_back(rec);
    r.centroid_trajectory.push_back(MatrixXd::Constant(2, 1, 0.1 * e));
  }
  r.best_epoch = 2;
  const auto ep = lines(epochs_csv(r));
  REQUIRE(ep.size() == 3);
  CHECK(ep[0] == "epoch,seg_loss,L_dom,L_sep,L_bw,train_miou,val_miou");
  CHECK(fields(ep[2])[0] == 2.0);
  CHECK(fields(ep[2])[1] == 0.5);
  const auto ce = lines(centroids_csv(r));
  REQUIRE(ce.size() == 5);
  CHECK(ce[0] == "epoch,filter,peak,centroid");
  CHECK(fields(ce[1]) == std::vector<double>{1.0, 1.0, 1.0, 0.1});
  CHECK(fields(ce[4]) == std::vector<double>{2.0, 2.0, 1.0, 0.2});
  const Json doc = report_to_json(r);
  CHECK(doc.at("best_epoch") == 2);
  CHECK(doc.at("best_val_miou").get<double>() == 52.0);
  CHECK(doc.at("epochs").size() == 2);
}

TEST_CASE("channel-grid export equals the filter-bank weights") {
  std::mt19937_64 gen(4);
  auto params = testing::random_filters(gen, 2, 2);
  params.range = {470.0, 630.0};
  const VectorXd wl = hyko_wavelengths();
  const auto curves = filter_curves(params, wl);
  const auto weights = evaluate_on_wavelengths<double>(params, wl).weights;
  CHECK(curves.responses == weights);
  const auto rows = lines(filter_curves_csv(curves));
  REQUIRE(rows.size() == 16);
  CHECK(rows[0] == "wavelength_nm,filter_1,filter_2");
  for (Index c = 0; c < 15; ++c) {
    const auto v = fields(rows[c + 1]);
    CHECK(v[0] == wl[c]);
    CHECK(v[1] == weights(0, c));
    CHECK(v[2] == weights(1, c));
  }
}

TEST_CASE("dense export peaks next to the dominant centroid") {
  auto params = PeakArrays<double>::zeros(1, 1);
  FilterBankParams<double> bank;
  static_cast<PeakArrays<double>&>(bank) = params;
  bank.range = {470.0, 630.0};
  bank.centroid(0, 0) = 0.4;
  bank.log_bandwidth(0, 0) = std::log(0.1);
  const auto curves = filter_curves(bank, hyko_wavelengths(), 161);
  CHECK(curves.dense);
  Index peak = 0;
  curves.responses.row(0).maxCoeff(&peak);
  CHECK(std::abs(curves.wavelengths_nm[peak] - (470.0 + 0.4 * 160.0)) <= 1.0);
  const std::string text = filter_curves_csv(curves);
  CHECK(text.rfind("# dense grid", 0) == 0);
  CHECK(lines(text).size() == 163);

  const auto dir = testing::scratch_dir("export");
  export_filters(bank, hyko_wavelengths(), std::nullopt, dir / "f.csv");
  CHECK(read_text(dir / "f.csv") == filter_curves_csv(filter_curves(bank, hyko_wavelengths())));
  CHECK_THROWS_AS(filter_curves(bank, hyko_wavelengths(), 1), ConfigError);
}
