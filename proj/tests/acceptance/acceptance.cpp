// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--work-dir DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "toolwear/config.hpp"
#include "toolwear/dataset.hpp"
#include "toolwear/features.hpp"
#include "toolwear/ingest.hpp"
#include "toolwear/lstm.hpp"
#include "toolwear/model_io.hpp"
#include "toolwear/pipeline.hpp"
#include "toolwear/spectrum.hpp"
#include "toolwear/synthrig.hpp"
#include "toolwear/trainer.hpp"
#include "toolwear/tuner.hpp"
#include "toolwear/wear.hpp"

using namespace toolwear;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Random feature inputs shared by criteria 1 and 3.
struct FeatureInputs {
  std::vector<std::vector<double>> sequences;
};

const FeatureInputs& feature_inputs() {
  static const FeatureInputs inputs = [] {
    FeatureInputs f;
    Rng rng(2024);
    std::vector<std::size_t> lengths{2, 3, 1875, 4096, 1024, 1875};
    while (lengths.size() < 120) lengths.push_back(2 + rng.below(4095));
    for (std::size_t n : lengths) {
      const double offset = rng.uniform(-50.0, 50.0);
      const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
      std::vector<double> y(n);
      for (auto& v : y) v = offset + scale * rng.normal();
      f.sequences.push_back(std::move(y));
    }
    return f;
  }();
  return inputs;
}

// Region 1 of the default synthetic run, built in-process from the library stages.
struct DefaultRun {
  std::size_t segments = 0;
  std::size_t anchors = 0;
  std::size_t quantized = 0;
  std::size_t region_rows = 0;
  dataset::WindowedDataset windows;
  dataset::Splits splits;
  dataset::WindowedDataset train_scaled, val_scaled;
};

const DefaultRun& default_run() {
  static const DefaultRun run = [] {
    const auto cfg = config::default_config(7);
    DefaultRun r;
    const auto truth = synthrig::generate_wear_curve(cfg.rig);
    const auto rec = synthrig::synthesize_recording(cfg.rig, truth);
    const auto segs = ingest::segment_by_markers(rec);
    r.segments = segs.size();
    const auto meas = synthrig::sample_wear_measurements(truth, cfg.rig.wear_measure_interval,
                                                         cfg.rig.measurement_noise_um, cfg.rig.seed);
    r.anchors = meas.size();
    const auto curve = wear::quantize(meas, cfg.rig.n_holes, cfg.quantize.jitter_um, cfg.quantize.seed);
    r.quantized = curve.size();
    const auto feats = features::select_features(
        features::moving_average(features::extract_features(segs, cfg.features.band),
                                 cfg.features.moving_average_window),
        cfg.features.drop);
    const auto slice = dataset::slice_region(feats, curve, cfg.dataset.regions.front());
    r.region_rows = slice.features.rows();
    r.windows = dataset::make_windows(slice.features, slice.wear_um, cfg.dataset.timestep);
    r.splits = dataset::split(r.windows, cfg.dataset.split);
    const auto scaler = dataset::fit_scaler(r.splits.train);
    r.train_scaled = dataset::apply_scaler(r.splits.train, scaler);
    r.val_scaled = dataset::apply_scaler(r.splits.val, scaler);
    return r;
  }();
  return run;
}

Outcome feature_oracles() {
  const auto t0 = Clock::now();
  const auto& in = feature_inputs();
  double worst = 0.0;
  bool has_1875 = false;
  Rng rng(77);
  for (const auto& y : in.sequences) {
    has_1875 |= y.size() == 1875;
    worst = std::max(worst, oracle::rel_err(features::rms(y), oracle::rms(y)));
    worst = std::max(worst, oracle::rel_err(features::standard_deviation(y), oracle::std_dev(y)));
    const double lo = rng.uniform(0.0, 200.0);
    const double hi = lo + rng.uniform(1.0, 250.0 - lo);
    for (const features::SpectralBand band : {features::SpectralBand{10, 250}, features::SpectralBand{lo, hi}}) {
      worst = std::max(worst, oracle::rel_err(features::spectral_power(y, band, 500.0),
                                              oracle::spectral_power(y, band.start_hz, band.end_hz, 500.0)));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-9 && secs < 10.0 && in.sequences.size() >= 100 && has_1875;
  return {ok, std::to_string(in.sequences.size()) + " sequences (len 2..4096 incl. 1875), worst rel err " +
                  fmt("%.2e", worst) + " (tol 1e-9), " + fmt("%.2f", secs) + " s (limit 10 s)"};
}

Outcome parseval() {
  Rng rng(99);
  double worst = 0.0;
  int count = 0;
  while (count < 50) {
    const std::size_t n = 2 + rng.below(4095);
    if (spectrum::is_power_of_two(n)) continue;
    std::vector<double> y(n);
    for (auto& v : y) v = rng.normal(rng.uniform(-3.0, 3.0), 1.0);
    long double time = 0.0L, freq = 0.0L;
    for (double v : y) time += static_cast<long double>(v) * v;
    for (const auto& c : spectrum::dft(y)) freq += std::norm(std::complex<long double>(c.real(), c.imag()));
    worst = std::max(worst, oracle::rel_err(static_cast<double>(freq), static_cast<double>(n * time)));
    // The same identity through the feature API over the full band [0, fs).
    const double spw = features::spectral_power(y, {0.0, 500.0}, 500.0);
    worst = std::max(worst, oracle::rel_err(2.0 * spw, static_cast<double>(n * time)));
    ++count;
  }
  return {worst <= 1e-9, "50 non-power-of-two lengths, worst rel err " + fmt("%.2e", worst) + " (tol 1e-9)"};
}

Outcome identity() {
  double worst = 0.0;
  for (const auto& y : feature_inputs().sequences) {
    const double r = features::rms(y), s = features::standard_deviation(y), m = features::mean(y);
    worst = std::max(worst, oracle::rel_err(r * r, s * s + m * m));
  }
  return {worst <= 1e-12, std::to_string(feature_inputs().sequences.size()) + " inputs, worst rel err " +
                              fmt("%.2e", worst) + " (tol 1e-12)"};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  Rng data_rng(5);
  dataset::WindowedDataset ds;
  ds.timestep = 8;
  ds.feature_names = {"a", "b", "c", "d", "e", "f"};
  for (std::size_t i = 0; i < 4 * 8 * 6; ++i) ds.inputs.push_back(data_rng.uniform());
  for (std::size_t i = 0; i < 4; ++i) {
    ds.targets.push_back(data_rng.uniform());
    ds.hole_of_sample.push_back(static_cast<std::int64_t>(i));
  }
  const auto batch = neural::make_batch(ds);

  double worst = 0.0, worst_abs = 0.0;
  std::string worst_where;
  std::size_t checked = 0, models = 0, reduced = 0;
  for (int layers : {1, 2}) {
    for (int units : {16, 32}) {
      for (auto act : {neural::Activation::Tanh, neural::Activation::Relu}) {
        for (auto reg : {neural::Regularizer::L1, neural::Regularizer::L2}) {
          neural::Hyperparameters hp;
          hp.units.assign(static_cast<std::size_t>(layers), units);
          hp.activation = act;
          hp.regularizer = reg;
          hp.regularization_factor = 1e-3;
          hp.seed = derive_seed(31, ++models);
          auto model = neural::init_model(hp, 6);
          Rng rng(hp.seed);
          for (auto& l : model.params.layers) {
            for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) += 0.2 * rng.normal();
          }
          model.params.b_out = 0.1;
          const auto report = neural::gradient_check(model, batch, 1e-5, 1e-4);
          checked += report.checked;
          reduced += report.reduced_step;
          worst_abs = std::max(worst_abs, report.max_abs_error);
          if (report.max_relative_error >= worst) {
            worst = report.max_relative_error;
            worst_where = std::to_string(layers) + "x" + std::to_string(units) + " " + neural::to_string(act) +
                          " " + neural::to_string(reg) + " " + report.worst_parameter;
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 120.0,
          std::to_string(models) + " models, " + std::to_string(checked) + " parameters, max rel err " +
              fmt("%.2e", worst) + " at " + worst_where + " (tol 1e-4; gradients below " +
              fmt("%.0e", neural::kGradientFloor) + " compared absolutely), max abs err " + fmt("%.1e", worst_abs) + ", " +
              std::to_string(reduced) + " probes refined at kinks, " + fmt("%.1f", secs) + " s (limit 120 s)"};
}

Outcome adam_first_step() {
  std::vector<double> theta{0.0}, m{0.0}, v{0.0};
  const std::vector<double> g{1.0};
  neural::adam_update(theta, g, m, v, 0.1, 1);
  const double expected = -0.1 * 1.0 / (std::sqrt(1.0) + 1e-8);
  const double err = std::abs(theta[0] - expected);
  return {err <= 1e-12, "theta = " + fmt("%.17g", theta[0]) + ", hand value " + fmt("%.17g", expected) +
                            ", |diff| " + fmt("%.1e", err) + " (tol 1e-12)"};
}

Outcome counting_laws() {
  const auto& r = default_run();
  const bool ok = r.segments == 1901 && r.anchors == 40 && r.quantized == 1901 && r.region_rows == 600 &&
                  r.windows.size() == 581 && r.splits.train.size() == 436 && r.splits.val.size() == 87 &&
                  r.splits.test.size() == 58;
  return {ok, "segments " + std::to_string(r.segments) + "/1901, anchors " + std::to_string(r.anchors) +
                  "/40, quantized " + std::to_string(r.quantized) + "/1901, region1 rows " +
                  std::to_string(r.region_rows) + "/600, windows " + std::to_string(r.windows.size()) +
                  "/581, split " + std::to_string(r.splits.train.size()) + "/" + std::to_string(r.splits.val.size()) +
                  "/" + std::to_string(r.splits.test.size()) + " (436/87/58)"};
}

config::PipelineConfig end_to_end_config() {
  auto cfg = config::default_config(7);
  cfg.quantize.jitter_um = 0.0;
  return cfg;
}

Outcome end_to_end(const fs::path& work) {
  const auto cfg = end_to_end_config();
  pipeline::RunOptions run;
  run.out_root = work / "pipeline-a";
  fs::remove_all(run.out_root);
  const auto t0 = Clock::now();
  pipeline::cmd_pipeline(cfg, run);
  const double secs = seconds_since(t0);
  const auto report = io::read_json(run.out_root / "report.json");
  bool ok = secs <= 300.0;
  std::string detail;
  for (const auto& region : report.at("regions")) {
    const double m = region.at("mape_percent").get<double>();
    ok = ok && m <= 10.0;
    detail += region.at("region").get<std::string>() + " " + fmt("%.2f", m) + "%, ";
  }
  ok = ok && report.at("regions").size() == 3;
  return {ok, "test MAPE " + detail + "limit 10%; " + fmt("%.1f", secs) + " s (limit 300 s)"};
}

Outcome training_time() {
  const auto& r = default_run();
  auto hp = config::default_config(7).model;
  auto model = neural::init_model(hp, r.train_scaled.n_features());
  const auto t0 = Clock::now();
  const auto report = neural::train(model, r.train_scaled, r.val_scaled, hp);
  const double secs = seconds_since(t0);
  return {secs <= 60.0 && report.stopped_epoch <= 100,
          "region1 reference model: " + std::to_string(report.stopped_epoch) + " epochs (best " +
              std::to_string(report.best_epoch) + "), " + fmt("%.1f", secs) + " s (limit 60 s)"};
}

Outcome determinism(const fs::path& work) {
  const auto cfg = end_to_end_config();
  pipeline::RunOptions a, b;
  a.out_root = work / "pipeline-a";
  b.out_root = work / "pipeline-b";
  if (!fs::exists(a.out_root / "report.json")) {
    fs::remove_all(a.out_root);
    pipeline::cmd_pipeline(cfg, a);
  }
  fs::remove_all(b.out_root);
  pipeline::cmd_pipeline(cfg, b);
  const std::string ra = slurp(a.out_root / "report.json"), rb = slurp(b.out_root / "report.json");
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.out_root)) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
    const auto rel = fs::relative(entry.path(), a.out_root);
    ++compared;
    if (slurp(entry.path()) != slurp(b.out_root / rel)) ++differing;
  }
  return {!ra.empty() && ra == rb && differing == 0,
          std::string("report.json ") + (ra == rb ? "byte-identical" : "DIFFERS") + " (" + std::to_string(ra.size()) +
              " bytes); " + std::to_string(compared - differing) + "/" + std::to_string(compared) +
              " other artifacts identical"};
}

Outcome tuner_gate() {
  const auto t0 = Clock::now();
  const auto& r = default_run();
  tuner::SearchSpace space;
  space.max_layers = 2;
  space.max_units = 32;
  tuner::SearchOptions opt;  // 16 trials, rungs 5/20/100, keep 0.5, seed 7
  const auto result = tuner::run_search(space, r.train_scaled, r.val_scaled, opt);

  // Every rung-0 configuration trained from scratch to the full budget.
  std::vector<double> full;
  for (const auto& t : result.trials) {
    auto model = neural::init_model(t.config, r.train_scaled.n_features());
    auto hp = t.config;
    hp.max_epochs = opt.rungs.back();
    full.push_back(neural::train(model, r.train_scaled, r.val_scaled, hp).best_val_loss);
  }
  const double med = median(full);

  const auto sizes = tuner::rung_sizes(opt.n_trials, opt.rungs.size(), opt.keep_fraction);
  long expected_budget = 0;
  bool per_rung_exact = result.rungs.size() == sizes.size();
  for (std::size_t k = 0; k < sizes.size() && per_rung_exact; ++k) {
    const int inc = opt.rungs[k] - (k ? opt.rungs[k - 1] : 0);
    expected_budget += static_cast<long>(sizes[k]) * inc;
    per_rung_exact = per_rung_exact && result.rungs[k].trials == sizes[k] &&
                     result.rungs[k].epochs_budgeted == static_cast<long>(sizes[k]) * inc &&
                     (k + 1 == sizes.size() || result.rungs[k].epochs_consumed == result.rungs[k].epochs_budgeted);
  }
  long consumed = 0;
  for (const auto& t : result.trials) consumed += t.epochs_run;
  const bool accounting = per_rung_exact && result.epochs_budgeted == expected_budget &&
                          result.epochs_consumed == consumed;
  const bool ok = result.trials.size() == 16 && result.best.best_val_loss <= med && accounting;
  return {ok, "winner trial " + std::to_string(result.best.trial) + " val MAE " +
                  fmt("%.5f", result.best.best_val_loss) + " <= median full-budget " + fmt("%.5f", med) +
                  "; budget " + std::to_string(result.epochs_budgeted) + "/" + std::to_string(expected_budget) +
                  " epochs, consumed " + std::to_string(result.epochs_consumed) + " = sum of trials " +
                  std::to_string(consumed) + (accounting ? " (exact)" : " (MISMATCH)") + "; " +
                  fmt("%.0f", seconds_since(t0)) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "toolwear-acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--work-dir DIR] [--only N[,N...]]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"feature oracle equivalence", feature_oracles},
      {"Parseval gate", parseval},
      {"identity gate rms^2 = std^2 + mean^2", identity},
      {"BPTT gradient check", gradient_check},
      {"Adam first-step oracle", adam_first_step},
      {"counting laws", counting_laws},
      {"end-to-end learning gate", [&] { return end_to_end(work); }},
      {"per-model training time", training_time},
      {"pipeline determinism", [&] { return determinism(work); }},
      {"tuner gate", tuner_gate},
  };

  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    ++ran;
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[i].first << " | "
              << o.detail << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
