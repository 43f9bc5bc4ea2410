#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "toolwear/config.hpp"
#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"
#include "toolwear/model_io.hpp"
#include "toolwear/pipeline.hpp"

using namespace toolwear;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// A 300-hole rig with short regions so the whole pipeline runs in a few seconds.
config::PipelineConfig mini_config() {
  const json doc = json::parse(R"({
    "rig": {"n_holes": 300, "wear_measure_interval": 20},
    "features": {"moving_average_window": 20},
    "dataset": {"regions": [{"name": "a", "start_hole": 40, "end_hole": 140},
                            {"name": "b", "start_hole": 140, "end_hole": 260}],
                "timestep": 5},
    "model": {"units": [16], "max_epochs": 4, "batch_size": 16},
    "tuner": {"n_trials": 2, "rungs": [1, 2], "space": {"max_layers": 1, "max_units": 16}}
  })");
  return config::from_json(doc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults round-trip through JSON") {
    const auto cfg = config::default_config(7);
    const auto back = config::from_json(config::to_json(cfg));
    CHECK(config::to_json(back) == config::to_json(cfg));
    CHECK(config::config_hash(back) == config::config_hash(cfg));
    CHECK(config::config_hash(cfg).size() == 64);
    CHECK(cfg.model.units == std::vector<int>{64, 64});
    CHECK(cfg.features.moving_average_window == 200);
    CHECK(cfg.dataset.timestep == 20);
  }

  TEST_CASE("seed cascades unless a sub-seed is explicit") {
    const auto a = config::from_json({{"seed", 42}});
    CHECK(a.rig.seed == 42);
    CHECK(a.quantize.seed == 42);
    CHECK(a.model.seed == 42);
    CHECK(a.tuner.options.seed == 42);
    const auto b = config::from_json({{"seed", 42}, {"rig", {{"seed", 5}}}});
    CHECK(b.rig.seed == 5);
    CHECK(b.model.seed == 42);
    CHECK(config::config_hash(a) != config::config_hash(b));
  }

  TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(config::from_json({{"sed", 1}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"rig", {{"n_hole", 3}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"model", {{"unit", {16}}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"rig", {{"n_holes", "many"}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"features", {{"band_end_hz", 900}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"segmentation", {{"method", "magic"}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"dataset", {{"split", {{"train", 0.9}}}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"tuner", {{"rungs", json::array()}}}}), ConfigError);
  }

  TEST_CASE("dotted overrides") {
    json doc = json::object();
    config::set_path(doc, "model.units", "[32,32]");
    config::set_path(doc, "segmentation.method", "threshold");
    config::set_path(doc, "quantize.jitter_um", "0");
    const auto cfg = config::from_json(doc);
    CHECK(cfg.model.units == std::vector<int>{32, 32});
    CHECK(cfg.segmentation.method == "threshold");
    CHECK(cfg.quantize.jitter_um == 0.0);
    CHECK_THROWS_AS(config::set_path(doc, "model..units", "1"), ConfigError);
  }

  TEST_CASE("data hash ignores model and tuner settings") {
    auto a = config::default_config(7);
    auto b = a;
    b.model.learning_rate = 5e-3;
    b.tuner.enabled = true;
    CHECK(config::data_hash(a) == config::data_hash(b));
    CHECK(config::config_hash(a) != config::config_hash(b));
    b.quantize.jitter_um = 0.0;
    CHECK(config::data_hash(a) != config::data_hash(b));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("mape") {
    CHECK(pipeline::mape(std::vector<double>{5, 6}, std::vector<double>{5, 6}) == 0.0);
    CHECK(pipeline::mape(std::vector<double>{100, 200}, std::vector<double>{110, 180}) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK_THROWS_AS(pipeline::mape(std::vector<double>{0, 1}, std::vector<double>{1, 1}), DomainError);
    CHECK_THROWS_AS(pipeline::mape(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
    CHECK_THROWS_AS(pipeline::mape(std::vector<double>{}, std::vector<double>{}), DimensionError);
  }

  TEST_CASE("stages, lineage and idempotence on a small rig") {
    const auto cfg = mini_config();
    pipeline::RunOptions run;
    run.out_root = fs::temp_directory_path() / "toolwear_cli_test";
    fs::remove_all(run.out_root);

    CHECK_THROWS_AS(pipeline::cmd_segment(cfg, run), Error);
    try {
      pipeline::cmd_extract(cfg, run);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).rfind("extract: ", 0) == 0);
      CHECK(std::string(e.what()).find("recording.csv") != std::string::npos);
      CHECK(exit_code(e.kind()) == 2);
    }

    pipeline::cmd_pipeline(cfg, run);
    const auto report = slurp(run.out_root / "report.json");
    const auto features = slurp(run.out_root / "extract" / "features.selected.csv");
    const auto model = slurp(run.out_root / "train" / "a" / "model.json");

    // Every stage directory echoes the config and records its lineage.
    for (const char* stage : {"simulate", "segment", "extract", "quantize"}) {
      const auto manifest = io::read_json(run.out_root / stage / "manifest.json");
      CHECK(manifest.at("config_hash") == config::config_hash(cfg));
      CHECK(manifest.at("seed") == cfg.seed);
      CHECK(config::from_json(io::read_json(run.out_root / stage / "config.json")).seed == cfg.seed);
    }

    // Rerunning stages rewrites identical bytes.
    pipeline::cmd_extract(cfg, run);
    pipeline::cmd_train(cfg, run);
    CHECK(slurp(run.out_root / "extract" / "features.selected.csv") == features);
    CHECK(slurp(run.out_root / "train" / "a" / "model.json") == model);
    pipeline::cmd_pipeline(cfg, run);
    CHECK(slurp(run.out_root / "report.json") == report);

    // Reported MAPE equals MAPE over the test rows of the plot data.
    const auto eval = io::read_json(run.out_root / "evaluate" / "a" / "eval.json");
    std::vector<double> measured, predicted;
    csv::Reader plot(run.out_root / "evaluate" / "a" / "plot.csv", {"hole_index", "measured_um", "predicted_um", "split"});
    std::size_t rows = 0;
    while (plot.next()) {
      ++rows;
      if (plot.field(3) == "test") {
        measured.push_back(plot.number(1));
        predicted.push_back(plot.number(2));
      }
    }
    CHECK(rows == 96);
    CHECK(measured.size() == eval.at("records").size());
    CHECK(std::abs(pipeline::mape(measured, predicted) - eval.at("mape_percent").get<double>()) <= 1e-9);

    // Data built under another configuration is refused.
    auto other = cfg;
    other.quantize.jitter_um = 0.25;
    CHECK_THROWS_AS(pipeline::cmd_evaluate(other, run), ValidationError);
    CHECK_THROWS_AS(pipeline::cmd_train(other, run), ValidationError);

    // A model from another region is refused.
    auto single = run;
    single.region = "b";
    single.model_path = run.out_root / "train" / "a" / "model.json";
    CHECK_THROWS_AS(pipeline::cmd_evaluate(cfg, single), ValidationError);

    // The tuner path produces a model that evaluate accepts.
    auto tuned = cfg;
    tuned.tuner.enabled = true;
    pipeline::cmd_tune(tuned, run);
    CHECK_NOTHROW(pipeline::cmd_evaluate(tuned, run));
    const auto search = io::read_json(run.out_root / "tune" / "a" / "search.json");
    CHECK(search.at("trials").size() == 2);

    fs::remove_all(run.out_root);
  }

  TEST_CASE("threshold segmentation path") {
    auto cfg = mini_config();
    cfg.segmentation.method = "threshold";
    pipeline::RunOptions run;
    run.out_root = fs::temp_directory_path() / "toolwear_cli_threshold";
    fs::remove_all(run.out_root);
    pipeline::cmd_simulate(cfg, run);
    const auto summary = pipeline::cmd_segment(cfg, run);
    CHECK(summary.find("300 cutting segments") != std::string::npos);
    fs::remove_all(run.out_root);
  }
}
