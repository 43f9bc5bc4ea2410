// toolwear: command-line front end for the flank-wear pipeline.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toolwear/config.hpp"
#include "toolwear/error.hpp"
#include "toolwear/model_io.hpp"
#include "toolwear/pipeline.hpp"

namespace {

using namespace toolwear;
using nlohmann::json;

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string region;
  std::string model;
};

// Flag values are folded into the config document as dotted overrides, applied after --set.
struct Flags {
  std::optional<std::string> method;
  std::optional<std::size_t> window;
  std::optional<double> threshold;
  std::optional<double> jitter;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> trials;
  std::vector<int> rungs;
  std::optional<double> keep;
  bool tune = false;
};

std::size_t env_threads() {
  const char* v = std::getenv("TOOLWEAR_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n == 0) throw ConfigError(std::string("TOOLWEAR_THREADS must be a positive integer, got '") + v + "'");
  return n;
}

config::PipelineConfig effective_config(const Common& c, const Flags& f) {
  json doc = c.config_path.empty() ? json::object() : io::read_json(c.config_path);
  if (c.seed) doc["seed"] = *c.seed;
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    config::set_path(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.method) doc["segmentation"]["method"] = *f.method;
  if (f.window) doc["segmentation"]["window_samples"] = *f.window;
  if (f.threshold) doc["segmentation"]["threshold_ratio"] = *f.threshold;
  if (f.jitter) doc["quantize"]["jitter_um"] = *f.jitter;
  if (f.epochs) doc["model"]["max_epochs"] = *f.epochs;
  if (f.lr) doc["model"]["learning_rate"] = *f.lr;
  if (f.trials) doc["tuner"]["n_trials"] = *f.trials;
  if (!f.rungs.empty()) doc["tuner"]["rungs"] = f.rungs;
  if (f.keep) doc["tuner"]["keep_fraction"] = *f.keep;
  if (f.tune) doc["tuner"]["enabled"] = true;
  return config::from_json(doc);
}

pipeline::RunOptions run_options(const Common& c) {
  pipeline::RunOptions run;
  if (!c.out.empty()) {
    run.out_root = c.out;
  } else if (const char* env = std::getenv("TOOLWEAR_OUTPUT_ROOT"); env && *env) {
    run.out_root = env;
  }
  run.threads = env_threads();
  run.region = c.region;
  run.model_path = c.model;
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tool flank-wear prediction pipeline: synthetic rig, features, LSTM regression"};
  app.require_subcommand(1);

  Common common;
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_path, "JSON config file (defaults apply to missing keys)")
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", common.out, "Output root (env TOOLWEAR_OUTPUT_ROOT, default ./toolwear-out)");
    sub->add_option("--seed", common.seed, "Master seed; sub-seeds follow unless set explicitly");
    sub->add_option("--set", common.overrides, "Override a config value, e.g. --set model.units=[32,32]")
        ->type_name("KEY=VALUE");
  };
  auto add_region = [&](CLI::App* sub) {
    sub->add_option("--region", common.region, "Only this region (default: all configured)");
  };

  std::vector<std::pair<CLI::App*, std::string (*)(const config::PipelineConfig&, const pipeline::RunOptions&)>> stages;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic recording and wear measurements");
  add_common(simulate);
  stages.emplace_back(simulate, &pipeline::cmd_simulate);

  auto* segment = app.add_subcommand("segment", "Isolate per-hole cutting segments");
  add_common(segment);
  segment->add_option("--method", flags.method, "markers or threshold")->check(CLI::IsMember({"markers", "threshold"}));
  segment->add_option("--window", flags.window, "Threshold method: RMS window in samples");
  segment->add_option("--threshold", flags.threshold, "Threshold method: fraction of peak RMS");
  stages.emplace_back(segment, &pipeline::cmd_segment);

  auto* extract = app.add_subcommand("extract", "Per-hole features, smoothing and selection");
  add_common(extract);
  stages.emplace_back(extract, &pipeline::cmd_extract);

  auto* quantize = app.add_subcommand("quantize", "Densify sparse wear measurements to one value per hole");
  add_common(quantize);
  quantize->add_option("--jitter", flags.jitter, "Uniform jitter amplitude in micrometers");
  stages.emplace_back(quantize, &pipeline::cmd_quantize);

  auto* build = app.add_subcommand("build", "Region slicing, windowing, splitting and scaling");
  add_common(build);
  add_region(build);
  stages.emplace_back(build, &pipeline::cmd_build);

  auto* train = app.add_subcommand("train", "Train one LSTM per region with the configured hyperparameters");
  add_common(train);
  add_region(train);
  train->add_option("--epochs", flags.epochs, "Maximum epochs");
  train->add_option("--lr", flags.lr, "Adam learning rate");
  stages.emplace_back(train, &pipeline::cmd_train);

  auto* tune = app.add_subcommand("tune", "Successive-halving hyperparameter search per region");
  add_common(tune);
  add_region(tune);
  tune->add_option("--trials", flags.trials, "Number of sampled configurations");
  tune->add_option("--rungs", flags.rungs, "Cumulative epoch budgets, e.g. --rungs 5 20 100");
  tune->add_option("--keep", flags.keep, "Fraction kept after each rung");
  stages.emplace_back(tune, &pipeline::cmd_tune);

  auto* evaluate = app.add_subcommand("evaluate", "Test-set MAPE and plot data per region");
  add_common(evaluate);
  add_region(evaluate);
  evaluate->add_option("--model", common.model, "Model file to evaluate (with --region)");
  evaluate->add_flag("--tuned", flags.tune, "Evaluate the tuner's models instead of the trained ones");
  stages.emplace_back(evaluate, &pipeline::cmd_evaluate);

  auto* run_all = app.add_subcommand("pipeline", "Run every stage for every region and write report.json");
  add_common(run_all);
  run_all->add_option("--epochs", flags.epochs, "Maximum epochs");
  run_all->add_option("--jitter", flags.jitter, "Quantizer jitter in micrometers");
  run_all->add_flag("--tune", flags.tune, "Use the hyperparameter search instead of the fixed model");
  stages.emplace_back(run_all, &pipeline::cmd_pipeline);

  auto* show = app.add_subcommand("config", "Print the effective configuration as JSON");
  add_common(show);
  bool show_hash = false;
  show->add_flag("--hash", show_hash, "Print the configuration hash instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const auto cfg = effective_config(common, flags);
    if (show->parsed()) {
      std::cout << (show_hash ? config::config_hash(cfg) : config::to_json(cfg).dump(2)) << '\n';
      return 0;
    }
    const auto run = run_options(common);
    for (const auto& [sub, fn] : stages) {
      if (sub->parsed()) {
        std::cout << fn(cfg, run) << std::endl;
        return 0;
      }
    }
    return 1;
  } catch (const Error& e) {
    std::cerr << "toolwear: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "toolwear: internal error: " << e.what() << '\n';
    return 2;
  }
}
