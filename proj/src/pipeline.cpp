#include "toolwear/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"
#include "toolwear/ingest.hpp"
#include "toolwear/model_io.hpp"
#include "toolwear/parallel.hpp"
#include "toolwear/synthrig.hpp"
#include "toolwear/trainer.hpp"
#include "toolwear/tuner.hpp"
#include "toolwear/wear.hpp"

namespace toolwear::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

double mape(std::span<const double> measured, std::span<const double> predicted) {
  if (measured.empty()) throw DimensionError("mape needs at least one value");
  if (measured.size() != predicted.size()) {
    throw DimensionError("mape inputs differ in length: " + std::to_string(measured.size()) + " vs " +
                         std::to_string(predicted.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (!(measured[i] > 0.0)) {
      throw DomainError("mape: measured value " + csv::format(measured[i]) + " at position " +
                        std::to_string(i) + " is not positive");
    }
    total += std::abs(measured[i] - predicted[i]) / measured[i];
  }
  return 100.0 * total / static_cast<double>(measured.size());
}

json to_json(const EvalReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"hole_index", r.hole_index}, {"measured_um", r.measured_um}, {"predicted_um", r.predicted_um}});
  }
  return {{"region", report.region}, {"mape_percent", report.mape_percent}, {"records", records}};
}

fs::path stage_dir(const RunOptions& run, const std::string& stage) { return run.out_root / stage; }

namespace {

using config::PipelineConfig;

json lineage(const PipelineConfig& cfg) {
  return {{"config_hash", config::config_hash(cfg)}, {"data_hash", config::data_hash(cfg)}, {"seed", cfg.seed}};
}

// Records what a stage wrote so downstream stages (and people) can check provenance.
class Manifest {
 public:
  Manifest(const PipelineConfig& cfg, std::string stage, fs::path dir)
      : cfg_(cfg), stage_(std::move(stage)), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  void add(const fs::path& file) { files_.push_back(file); }

  void write() const {
    json files = json::array();
    for (const auto& f : files_) {
      files.push_back({{"path", fs::relative(f, dir_).generic_string()}, {"bytes", fs::file_size(f)}});
    }
    json m = lineage(cfg_);
    m["stage"] = stage_;
    m["files"] = files;
    io::write_json(config::to_json(cfg_), dir_ / "config.json");
    io::write_json(m, dir_ / "manifest.json");
  }

 private:
  const PipelineConfig& cfg_;
  std::string stage_;
  fs::path dir_;
  std::vector<fs::path> files_;
};

std::string run_stage(const std::string& name, const std::function<std::string()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    rethrow_with_context(e, name);
  } catch (const fs::filesystem_error& e) {
    throw IoError(name + ": " + e.what());
  }
}

std::vector<dataset::RegionSpec> selected_regions(const PipelineConfig& cfg, const RunOptions& run) {
  if (run.region.empty()) return cfg.dataset.regions;
  for (const auto& r : cfg.dataset.regions) {
    if (r.name == run.region) return {r};
  }
  throw ConfigError("unknown region '" + run.region + "'");
}

// Runs `fn` per region, concurrently when allowed, and joins the summaries in region order.
std::string for_regions(const PipelineConfig& cfg, const RunOptions& run,
                        const std::function<std::string(const dataset::RegionSpec&)>& fn) {
  const auto regions = selected_regions(cfg, run);
  std::vector<std::string> parts(regions.size());
  parallel_for(regions.size(), run.threads, [&](std::size_t i) { parts[i] = fn(regions[i]); });
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// The data hash recorded by `build` for a region; everything downstream must agree with it.
std::string built_data_hash(const RunOptions& run, const std::string& region) {
  const json scaler = io::read_json(stage_dir(run, "build") / region / "scaler.json");
  return scaler.at("lineage").at("data_hash").get<std::string>();
}

void require_fresh_build(const PipelineConfig& cfg, const RunOptions& run, const std::string& region) {
  const std::string built = built_data_hash(run, region);
  if (built != config::data_hash(cfg)) {
    throw ValidationError("datasets for region '" + region +
                          "' were built from a different configuration (data hash " + built.substr(0, 12) +
                          "); rerun build");
  }
}

struct RegionData {
  dataset::WindowedDataset train, val, test;
  dataset::ScalerParams scaler;
};

RegionData load_region(const RunOptions& run, const std::string& region) {
  const fs::path dir = stage_dir(run, "build") / region;
  RegionData d;
  d.train = dataset::read_windows(dir / "train.csv");
  d.val = dataset::read_windows(dir / "val.csv");
  d.test = dataset::read_windows(dir / "test.csv");
  d.scaler = io::scaler_from_json(io::read_json(dir / "scaler.json").at("scaler"));
  return d;
}

json train_report_json(const neural::TrainReport& r) {
  return {{"train_loss", r.train_loss},       {"val_loss", r.val_loss},
          {"stopped_epoch", r.stopped_epoch}, {"best_epoch", r.best_epoch},
          {"best_val_loss", r.best_val_loss}, {"early_stopped", r.early_stopped}};
}

// Paths under the output root are recorded relative to it so relocated runs compare equal.
std::string portable_path(const RunOptions& run, const fs::path& p) {
  const fs::path rel = fs::weakly_canonical(p).lexically_relative(fs::weakly_canonical(run.out_root));
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

fs::path default_model_path(const PipelineConfig& cfg, const RunOptions& run, const std::string& region) {
  return stage_dir(run, cfg.tuner.enabled ? "tune" : "train") / region / "model.json";
}

EvalReport evaluate_region(const PipelineConfig& cfg, const RunOptions& run, const dataset::RegionSpec& region) {
  require_fresh_build(cfg, run, region.name);
  const fs::path model_path = run.model_path.empty() ? default_model_path(cfg, run, region.name) : run.model_path;
  const json doc = io::read_json(model_path);
  if (!doc.contains("lineage")) {
    throw ValidationError(model_path.string() + " carries no lineage; refusing to evaluate it");
  }
  const std::string model_data = doc.at("lineage").at("data_hash").get<std::string>();
  if (model_data != config::data_hash(cfg)) {
    throw ValidationError(model_path.string() + " was trained on different data (data hash " +
                          model_data.substr(0, 12) + ")");
  }
  if (doc.at("lineage").value("region", region.name) != region.name) {
    throw ValidationError(model_path.string() + " belongs to region '" +
                          doc.at("lineage").at("region").get<std::string>() + "'");
  }
  const neural::LstmModel model = io::model_from_json(doc);
  const RegionData data = load_region(run, region.name);

  const fs::path dir = stage_dir(run, "evaluate") / region.name;
  Manifest manifest(cfg, "evaluate", dir);

  EvalReport report;
  report.region = region.name;
  const fs::path plot_path = dir / "plot.csv";
  csv::Writer plot(plot_path, {"hole_index", "measured_um", "predicted_um", "split"});
  const std::pair<const char*, const dataset::WindowedDataset*> splits[] = {
      {"train", &data.train}, {"val", &data.val}, {"test", &data.test}};
  for (const auto& [name, ds] : splits) {
    const std::vector<double> pred = neural::predict(model, *ds);
    for (std::size_t i = 0; i < ds->size(); ++i) {
      std::string line;
      csv::append(line, ds->hole_of_sample[i]);
      line += ',';
      csv::append(line, ds->targets[i]);
      line += ',';
      csv::append(line, pred[i]);
      line += ',';
      line += name;
      plot.raw(line);
      if (std::string(name) == "test") report.records.push_back({ds->hole_of_sample[i], ds->targets[i], pred[i]});
    }
  }
  plot.close();
  manifest.add(plot_path);

  std::vector<double> measured, predicted;
  for (const auto& r : report.records) {
    measured.push_back(r.measured_um);
    predicted.push_back(r.predicted_um);
  }
  report.mape_percent = mape(measured, predicted);

  json out = to_json(report);
  out["lineage"] = lineage(cfg);
  out["lineage"]["model"] = portable_path(run, model_path);
  out["lineage"]["model_config_hash"] = doc.at("lineage").at("config_hash");
  io::write_json(out, dir / "eval.json");
  manifest.add(dir / "eval.json");
  manifest.write();
  return report;
}

}  // namespace

std::string cmd_simulate(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("simulate", [&] {
    cfg.validate();
    const fs::path dir = stage_dir(run, "simulate");
    Manifest manifest(cfg, "simulate", dir);
    const auto truth = synthrig::generate_wear_curve(cfg.rig);
    const auto rec = synthrig::synthesize_recording(cfg.rig, truth);
    const auto measurements = synthrig::sample_wear_measurements(truth, cfg.rig.wear_measure_interval,
                                                                 cfg.rig.measurement_noise_um, cfg.rig.seed);
    synthrig::write_recording(rec, dir / "recording.csv");
    wear::write_measurements(measurements, dir / "wear_measurements.csv");
    synthrig::write_ground_truth(truth, dir / "ground_truth_wear.csv");
    for (const char* f : {"recording.csv", "recording.markers.csv", "wear_measurements.csv", "ground_truth_wear.csv"}) {
      manifest.add(dir / f);
    }
    manifest.write();
    return "simulate: " + std::to_string(rec.markers.size()) + " holes, " + std::to_string(rec.size()) +
           " samples, " + std::to_string(measurements.size()) + " wear measurements -> " + dir.string();
  });
}

std::string cmd_segment(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("segment", [&] {
    cfg.validate();
    const fs::path src = stage_dir(run, "simulate") / "recording.csv";
    std::vector<ingest::CuttingSegment> segments;
    if (cfg.segmentation.method == "markers") {
      segments = ingest::segment_by_markers(ingest::load_recording(src, cfg.rig.sampling_rate_hz));
    } else {
      auto rec = ingest::load_recording(src, cfg.rig.sampling_rate_hz);
      rec.markers.clear();
      segments = ingest::segment_by_threshold(rec, cfg.segmentation.threshold);
    }
    const fs::path dir = stage_dir(run, "segment");
    Manifest manifest(cfg, "segment", dir);
    synthrig::write_markers(ingest::extents(segments), dir / "segments.csv");
    manifest.add(dir / "segments.csv");
    manifest.write();
    return "segment: " + std::to_string(segments.size()) + " cutting segments (" + cfg.segmentation.method +
           ") -> " + dir.string();
  });
}

std::string cmd_extract(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("extract", [&] {
    cfg.validate();
    auto rec = ingest::load_recording(stage_dir(run, "simulate") / "recording.csv", cfg.rig.sampling_rate_hz,
                                      stage_dir(run, "segment") / "segments.csv");
    const auto segments = ingest::segment_by_markers(rec);
    const auto raw = features::extract_features(segments, cfg.features.band);
    const auto smoothed = features::moving_average(raw, cfg.features.moving_average_window);
    const auto selected = features::select_features(smoothed, cfg.features.drop);

    const fs::path dir = stage_dir(run, "extract");
    Manifest manifest(cfg, "extract", dir);
    features::write_matrix(raw, dir / "features.raw.csv");
    features::write_matrix(smoothed, dir / "features.smoothed.csv");
    features::write_matrix(selected, dir / "features.selected.csv");
    for (const char* f : {"features.raw.csv", "features.smoothed.csv", "features.selected.csv"}) manifest.add(dir / f);
    manifest.write();
    return "extract: " + std::to_string(raw.rows()) + " rows, " + std::to_string(selected.cols()) +
           " selected features -> " + dir.string();
  });
}

std::string cmd_quantize(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("quantize", [&] {
    cfg.validate();
    const auto measurements = wear::read_measurements(stage_dir(run, "simulate") / "wear_measurements.csv");
    const auto curve = wear::quantize(measurements, cfg.rig.n_holes, cfg.quantize.jitter_um, cfg.quantize.seed);
    const fs::path dir = stage_dir(run, "quantize");
    Manifest manifest(cfg, "quantize", dir);
    wear::write_curve(curve, dir / "wear_curve.csv");
    manifest.add(dir / "wear_curve.csv");
    manifest.write();
    return "quantize: " + std::to_string(measurements.size()) + " anchors -> " + std::to_string(curve.size()) +
           " per-hole values -> " + dir.string();
  });
}

std::string cmd_build(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("build", [&] {
    cfg.validate();
    const auto selected = features::read_matrix(stage_dir(run, "extract") / "features.selected.csv", true);
    const auto curve = wear::read_curve(stage_dir(run, "quantize") / "wear_curve.csv");
    return for_regions(cfg, run, [&](const dataset::RegionSpec& region) {
      const auto slice = dataset::slice_region(selected, curve, region);
      const auto windows = dataset::make_windows(slice.features, slice.wear_um, cfg.dataset.timestep);
      const auto parts = dataset::split(windows, cfg.dataset.split);
      const auto scaler = dataset::fit_scaler(parts.train);

      json sensitivity = json::object();
      for (std::size_t c = 0; c < slice.features.cols(); ++c) {
        const auto col = slice.features.column(c);
        const auto s = features::trend_sensitivity(col, slice.wear_um);
        sensitivity[slice.features.columns[c]] = {{"score", s.score}, {"zero_variance", s.zero_variance}};
      }

      const fs::path dir = stage_dir(run, "build") / region.name;
      Manifest manifest(cfg, "build", dir);
      dataset::write_windows(parts.train, dir / "train.csv");
      dataset::write_windows(parts.val, dir / "val.csv");
      dataset::write_windows(parts.test, dir / "test.csv");
      json lin = lineage(cfg);
      lin["region"] = region.name;
      io::write_json({{"scaler", io::to_json(scaler)}, {"lineage", lin}}, dir / "scaler.json");
      io::write_json({{"region", region.name}, {"sensitivity", sensitivity}, {"lineage", lin}},
                     dir / "sensitivity.json");
      for (const char* f : {"train.csv", "val.csv", "test.csv", "scaler.json", "sensitivity.json"}) {
        manifest.add(dir / f);
      }
      manifest.write();
      return region.name + ": " + std::to_string(slice.features.rows()) + " rows, " +
             std::to_string(windows.size()) + " windows, split " + std::to_string(parts.train.size()) + "/" +
             std::to_string(parts.val.size()) + "/" + std::to_string(parts.test.size());
    });
  });
}

std::string cmd_train(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("train", [&] {
    cfg.validate();
    return for_regions(cfg, run, [&](const dataset::RegionSpec& region) {
      require_fresh_build(cfg, run, region.name);
      const RegionData data = load_region(run, region.name);
      const auto train = dataset::apply_scaler(data.train, data.scaler);
      const auto val = dataset::apply_scaler(data.val, data.scaler);
      neural::LstmModel model = neural::init_model(cfg.model, train.n_features());
      const auto report = neural::train(model, train, val, cfg.model);
      model.scaler = data.scaler;

      const fs::path dir = stage_dir(run, "train") / region.name;
      Manifest manifest(cfg, "train", dir);
      json lin = lineage(cfg);
      lin["region"] = region.name;
      io::save_model(model, dir / "model.json", {{"lineage", lin}});
      io::write_json({{"region", region.name}, {"report", train_report_json(report)}, {"lineage", lin}},
                     dir / "train_report.json");
      io::write_json({{"wall_time_s", report.wall_time_s}}, dir / "timing.json");
      manifest.add(dir / "model.json");
      manifest.add(dir / "train_report.json");
      manifest.write();
      return region.name + ": " + std::to_string(report.stopped_epoch) + " epochs, best val MAE " +
             fixed(report.best_val_loss, 5) + " at epoch " + std::to_string(report.best_epoch);
    });
  });
}

std::string cmd_tune(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("tune", [&] {
    cfg.validate();
    // Regions run one after another here; the trial-level pool already uses the threads.
    RunOptions serial = run;
    serial.threads = 1;
    return for_regions(cfg, serial, [&](const dataset::RegionSpec& region) {
      require_fresh_build(cfg, run, region.name);
      const RegionData data = load_region(run, region.name);
      const auto train = dataset::apply_scaler(data.train, data.scaler);
      const auto val = dataset::apply_scaler(data.val, data.scaler);
      auto options = cfg.tuner.options;
      options.threads = run.threads;
      auto result = tuner::run_search(cfg.tuner.space, train, val, options);
      result.best_model.scaler = data.scaler;

      const fs::path dir = stage_dir(run, "tune") / region.name;
      Manifest manifest(cfg, "tune", dir);
      json lin = lineage(cfg);
      lin["region"] = region.name;
      json search = tuner::to_json(result, false);
      search["lineage"] = lin;
      io::write_json(search, dir / "search.json");
      tuner::write_leaderboard(result, dir / "leaderboard.csv");
      io::save_model(result.best_model, dir / "model.json", {{"lineage", lin}});
      manifest.add(dir / "search.json");
      manifest.add(dir / "model.json");
      manifest.write();
      return region.name + ": best trial " + std::to_string(result.best.trial) + " val MAE " +
             fixed(result.best.best_val_loss, 5) + ", " + std::to_string(result.epochs_consumed) + " epochs";
    });
  });
}

std::string cmd_evaluate(const PipelineConfig& cfg, const RunOptions& run) {
  return run_stage("evaluate", [&] {
    cfg.validate();
    if (!run.model_path.empty() && selected_regions(cfg, run).size() != 1) {
      throw ConfigError("--model needs a single --region");
    }
    return for_regions(cfg, run, [&](const dataset::RegionSpec& region) {
      const EvalReport r = evaluate_region(cfg, run, region);
      return region.name + ": test MAPE " + fixed(r.mape_percent, 3) + "% over " + std::to_string(r.records.size()) +
             " holes";
    });
  });
}

std::string cmd_pipeline(const PipelineConfig& cfg, const RunOptions& run) {
  cfg.validate();
  RunOptions all = run;
  all.region.clear();
  all.model_path.clear();
  cmd_simulate(cfg, all);
  cmd_segment(cfg, all);
  cmd_extract(cfg, all);
  cmd_quantize(cfg, all);
  cmd_build(cfg, all);
  if (cfg.tuner.enabled) {
    cmd_tune(cfg, all);
  } else {
    cmd_train(cfg, all);
  }
  cmd_evaluate(cfg, all);

  return run_stage("report", [&] {
    json regions = json::array();
    std::string summary;
    for (const auto& region : cfg.dataset.regions) {
      const json eval = io::read_json(stage_dir(all, "evaluate") / region.name / "eval.json");
      json entry = {{"region", region.name},
                    {"start_hole", region.start_hole},
                    {"end_hole", region.end_hole},
                    {"mape_percent", eval.at("mape_percent")},
                    {"test_records", eval.at("records")}};
      if (!cfg.tuner.enabled) {
        const json tr = io::read_json(stage_dir(all, "train") / region.name / "train_report.json");
        entry["best_epoch"] = tr.at("report").at("best_epoch");
        entry["stopped_epoch"] = tr.at("report").at("stopped_epoch");
        entry["best_val_loss"] = tr.at("report").at("best_val_loss");
      } else {
        const json search = io::read_json(stage_dir(all, "tune") / region.name / "search.json");
        entry["search_best"] = search.at("best");
      }
      // Fig. 6 analogue: measured vs predicted over every window of the region.
      json curve = json::array();
      csv::Reader plot(stage_dir(all, "evaluate") / region.name / "plot.csv",
                       {"hole_index", "measured_um", "predicted_um", "split"});
      while (plot.next()) {
        curve.push_back({plot.integer(0), plot.number(1), plot.number(2), plot.field(3)});
      }
      entry["plot"] = curve;
      regions.push_back(entry);
      summary += (summary.empty() ? "" : ", ") + region.name + " " + fixed(eval.at("mape_percent").get<double>(), 3) + "%";
    }
    json report = lineage(cfg);
    report["plot_columns"] = {"hole_index", "measured_um", "predicted_um", "split"};
    report["regions"] = regions;
    io::write_json(report, run.out_root / "report.json");
    return "pipeline: test MAPE " + summary + " -> " + (run.out_root / "report.json").string();
  });
}

}  // namespace toolwear::pipeline
