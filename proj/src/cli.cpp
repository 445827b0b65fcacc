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

#include "lqe/cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "lqe/classical_dr.hpp"
#include "lqe/cube_io.hpp"
#include "lqe/export.hpp"
#include "lqe/metrics.hpp"
#include "lqe/serialize.hpp"
#include "lqe/synthetic.hpp"
#include "lqe/trainer.hpp"

namespace lqe {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string pred;
  std::string truth;
  std::string filters;
  std::string cube;
  std::optional<Index> grid;
};

LabeledCube load_labeled(const fs::path& path) {
  CubeFile file = read_cube(path);
  if (!file.labels) throw DataError(path.string() + " has no label block");
  LabeledCube item{std::move(file.cube), std::move(*file.labels)};
  item.validate();
  return item;
}

fs::path prepare_out(const std::string& dir) {
  const fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return out;
}

int cmd_gen_synth(const Options& o, std::ostream& out) {
  SynthSpec spec = synth_spec_from_json(read_json(o.config));
  if (o.seed) spec.seed = *o.seed;
  const fs::path dir = prepare_out(o.out);
  const SynthDataset data = gen_synthetic(spec);
  write_cube(dir / "train.hypc", data.train.cube, &data.train.labels);
  write_cube(dir / "val.hypc", data.val.cube, &data.val.labels);
  out << "wrote " << (dir / "train.hypc").string() << " (" << spec.train_images << " images) and "
      << (dir / "val.hypc").string() << " (" << spec.val_images << " images), " << spec.wavelengths_nm.size()
      << " channels, " << spec.num_classes() << " classes\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const fs::path config_path(o.config);
  TrainJob job = train_job_from_json(read_json(config_path), config_path.parent_path());
  if (o.seed) job.config.seed = *o.seed;
  if (o.threads > 1) job.config.threads = o.threads;
  const fs::path dir = prepare_out(o.out);

  const LabeledCube train_set = load_labeled(job.train_path);
  const LabeledCube val_set = load_labeled(job.val_path);
  const TrainReport report = train({train_set}, {val_set}, job.filters, job.peaks, job.config, job.range);

  write_text(dir / "report.json", dump_json(report_to_json(report)));
  write_text(dir / "epochs.csv", epochs_csv(report));
  write_text(dir / "centroids.csv", centroids_csv(report));
  write_text(dir / "filters.json", dump_json(filters_to_json(*report.filters)));

  if (job.write_predictions) {
    const auto head = make_head(report.head_kind, job.filters, val_set.labels.num_classes, report.hidden_width, 0);
    head->set_parameters(report.head_parameters);
    const MatrixXd features = reduce_to_features(*report.filters, val_set.cube, job.config.effective_threads());
    LabelMap pred = val_set.labels;
    pred.values = predict_labels(head->forward(features, nullptr));
    write_cube(dir / "val_pred.hypc", val_set.cube, &pred);
  }

  const EpochRecord& best = report.best();
  char line[160];
  std::snprintf(line, sizeof line, "best epoch %d of %zu: val mIoU %.2f, train mIoU %.2f\n", report.best_epoch,
                report.epochs.size(), best.val_miou, best.train_miou);
  out << line;
  const VectorXd centroids = dominant_centroids<double>(*report.filters);
  out << "dominant centroids:";
  for (Index f = 0; f < centroids.size(); ++f) {
    std::snprintf(line, sizeof line, " %.4f", centroids[f]);
    out << line;
  }
  out << "\n";
  return kExitOk;
}

int cmd_reduce(const Options& o, std::ostream& out) {
  const fs::path config_path(o.config);
  const Json doc = read_json(config_path);
  const auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : config_path.parent_path() / path;
  };
  const auto paths = [&](const char* key) {
    std::vector<fs::path> list;
    try {
      for (const auto& p : doc.at(key)) list.push_back(resolve(p.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("reduce config '") + key + "': " + e.what());
    }
    return list;
  };
  const fs::path dir = prepare_out(o.out);

  ClassicalPipeline pipeline;
  if (doc.contains("pipeline")) {
    pipeline = pipeline_from_json(read_json(resolve(doc.at("pipeline").get<std::string>())));
  } else {
    Index components = 0, sample_size = 0;
    std::string method;
    NmfOptions nmf;
    std::uint64_t seed = 0;
    try {
      method = doc.at("method").get<std::string>();
      components = doc.at("components").get<Index>();
      sample_size = doc.value("sample_size", Index{10000});
      seed = doc.value("seed", std::uint64_t{0});
      if (doc.contains("nmf")) {
        nmf.max_iter = doc.at("nmf").value("max_iter", nmf.max_iter);
        nmf.tol = doc.at("nmf").value("tol", nmf.tol);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("reduce config: ") + e.what());
    }
    if (o.seed) seed = *o.seed;
    nmf.seed = seed;
    std::vector<LabeledCube> fit_set;
    for (const auto& p : paths("fit")) fit_set.push_back(load_labeled(p));
    const PixelSample sample = stratified_sample(fit_set, sample_size, seed);
    pipeline.stats = fit_band_stats(sample);
    const MatrixXd z = apply_band_stats(sample.matrix, pipeline.stats);
    const ProjectionKind kind = projection_kind_from_string(method);
    pipeline.projection = kind == ProjectionKind::kPca ? fit_pca(z, components) : fit_nmf(z, components, nmf);
    write_text(dir / "pipeline.json", dump_json(pipeline_to_json(pipeline)));
    out << "fitted " << method << " with " << components << " components on " << sample.matrix.rows()
        << " sampled pixels\n";
  }

  const Index F = pipeline.projection.components.rows();
  const VectorXd component_axis = VectorXd::LinSpaced(F, 1.0, double(F));
  for (const auto& p : doc.contains("apply") ? paths("apply") : std::vector<fs::path>{}) {
    CubeFile file = read_cube(p);
    const ReducedCube<double> reduced = project(file.cube, pipeline.stats, pipeline.projection, o.threads);
    const Cube as_cube(reduced.dims(), component_axis, reduced.data());
    const fs::path target = dir / (p.stem().string() + ".reduced.hypc");
    write_cube(target, as_cube, file.labels ? &*file.labels : nullptr);
    out << "wrote " << target.string() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const CubeFile pred = read_cube(o.pred);
  const CubeFile truth = read_cube(o.truth);
  if (!pred.labels || !truth.labels) throw DataError("both --pred and --truth need a label block");
  const LabelMap& p = *pred.labels;
  const LabelMap& t = *truth.labels;
  if (p.batch != t.batch || p.height != t.height || p.width != t.width) {
    throw DimensionError("prediction and ground-truth label maps differ in shape");
  }
  if (p.num_classes != t.num_classes) throw DataError("prediction and ground truth declare different class counts");
  ConfusionMatrix cm(t.num_classes);
  cm.accumulate(p.values, t.values, t.ignore);
  const SegMetrics metrics = compute_metrics(cm);
  if (!o.out.empty()) write_text(prepare_out(o.out) / "metrics.json", dump_json(metrics_to_json(metrics)));
  out << dump_json(metrics_to_json(metrics)) << "\n" << format_metrics_table(metrics);
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
  const FilterBankParams<double> params = filters_from_json(read_json(o.filters));
  const CubeFile file = read_cube(o.cube);
  const fs::path dir = prepare_out(o.out);
  export_filters(params, file.cube.wavelengths(), o.grid, dir / "filters.csv");
  out << "wrote " << (dir / "filters.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learnable spectral filter banks for hyperspectral segmentation", "lqe"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-synth", "Generate a labeled synthetic dataset");
  gen->add_option("--config", o.config, "synthetic spec JSON")->required();
  gen->add_option("--out", o.out, "output directory")->required();
  gen->add_option("--seed", o.seed, "seed override");

  auto* tr = app.add_subcommand("train", "Train a filter bank and head");
  tr->add_option("--config", o.config, "training job JSON")->required();
  tr->add_option("--out", o.out, "output directory")->required();
  tr->add_option("--seed", o.seed, "seed override");
  tr->add_option("--threads", o.threads, "worker threads (ignored in deterministic mode)")->check(CLI::PositiveNumber);

  auto* red = app.add_subcommand("reduce", "Fit and apply a PCA or NMF pipeline");
  red->add_option("--config", o.config, "reduction JSON")->required();
  red->add_option("--out", o.out, "output directory")->required();
  red->add_option("--seed", o.seed, "sampling seed override");
  red->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("eval", "Score predicted labels against ground truth");
  ev->add_option("--pred", o.pred, "prediction HYPC file")->required();
  ev->add_option("--truth", o.truth, "ground-truth HYPC file")->required();
  ev->add_option("--out", o.out, "directory for metrics.json");
  ev->add_option("--config", o.config, "unused");
  ev->add_option("--seed", o.seed, "unused");

  auto* ex = app.add_subcommand("export-filters", "Write filter response curves as CSV");
  ex->add_option("--filters", o.filters, "filter bank JSON")->required();
  ex->add_option("--cube", o.cube, "HYPC file providing the dataset channels")->required();
  ex->add_option("--out", o.out, "output directory")->required();
  ex->add_option("--grid", o.grid, "dense grid size")->check(CLI::Range(Index{2}, Index{1} << 24));
  ex->add_option("--config", o.config, "unused");
  ex->add_option("--seed", o.seed, "unused");

  std::vector<const char*> argv{"lqe"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_synth(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (red->parsed()) return cmd_reduce(o, out);
    if (ev->parsed()) return cmd_eval(o, out);
    return cmd_export(o, out);
  } catch (const DivergedError& e) {
    err << "lqe: training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ConfigError& e) {
    err << "lqe: invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "lqe: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace lqe
