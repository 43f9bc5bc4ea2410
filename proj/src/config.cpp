#include "toolwear/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "toolwear/error.hpp"
#include "toolwear/model_io.hpp"

namespace toolwear::config {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
  }

  template <typename T>
  bool get(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    seen_.insert(key);
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + name(key) + "' has the wrong type: " + it->dump());
    }
    return true;
  }

  const json* child(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + name(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json channel_to_json(const synthrig::ChannelModel& c) {
  return {{"base", c.base},
          {"wear_gain", c.wear_gain},
          {"transient_base", c.transient_base},
          {"transient_gain", c.transient_gain},
          {"spindle_amplitude", c.spindle_amplitude},
          {"flute_amplitude", c.flute_amplitude},
          {"spindle_phase", c.spindle_phase},
          {"flute_phase", c.flute_phase},
          {"noise_std", c.noise_std},
          {"gap_noise_std", c.gap_noise_std},
          {"hole_jitter", c.hole_jitter}};
}

void channel_from_json(const json& j, const std::string& path, synthrig::ChannelModel& c) {
  ObjectReader r(j, path);
  r.get("base", c.base);
  r.get("wear_gain", c.wear_gain);
  r.get("transient_base", c.transient_base);
  r.get("transient_gain", c.transient_gain);
  r.get("spindle_amplitude", c.spindle_amplitude);
  r.get("flute_amplitude", c.flute_amplitude);
  r.get("spindle_phase", c.spindle_phase);
  r.get("flute_phase", c.flute_phase);
  r.get("noise_std", c.noise_std);
  r.get("gap_noise_std", c.gap_noise_std);
  r.get("hole_jitter", c.hole_jitter);
  r.finish();
}

json rig_to_json(const synthrig::RigConfig& rig) {
  const auto& s = rig.signal;
  const auto& w = rig.wear;
  return {{"sampling_rate_hz", rig.sampling_rate_hz},
          {"spindle_speed_rpm", rig.spindle_speed_rpm},
          {"feed_mm_per_min", rig.feed_mm_per_min},
          {"hole_depth_mm", rig.hole_depth_mm},
          {"n_holes", rig.n_holes},
          {"wear_measure_interval", rig.wear_measure_interval},
          {"flutes", rig.flutes},
          {"seed", rig.seed},
          {"measurement_noise_um", rig.measurement_noise_um},
          {"signal",
           {{"im", channel_to_json(s.im)},
            {"fz", channel_to_json(s.fz)},
            {"tz", channel_to_json(s.tz)},
            {"entry_tau_s", s.entry_tau_s},
            {"exit_tau_s", s.exit_tau_s},
            {"gap_s", s.gap_s},
            {"noise_enabled", s.noise_enabled}}},
          {"wear_shape",
           {{"initial_um", w.initial_um},
            {"break_in_um", w.break_in_um},
            {"break_in_fraction", w.break_in_fraction},
            {"steady_um", w.steady_um},
            {"accel_um", w.accel_um},
            {"accel_start", w.accel_start},
            {"variation", w.variation}}}};
}

void rig_from_json(const json& j, synthrig::RigConfig& rig) {
  ObjectReader r(j, "rig");
  r.get("sampling_rate_hz", rig.sampling_rate_hz);
  r.get("spindle_speed_rpm", rig.spindle_speed_rpm);
  r.get("feed_mm_per_min", rig.feed_mm_per_min);
  r.get("hole_depth_mm", rig.hole_depth_mm);
  r.get("n_holes", rig.n_holes);
  r.get("wear_measure_interval", rig.wear_measure_interval);
  r.get("flutes", rig.flutes);
  r.get("seed", rig.seed);
  r.get("measurement_noise_um", rig.measurement_noise_um);
  if (const json* s = r.child("signal")) {
    ObjectReader sr(*s, "rig.signal");
    if (const json* c = sr.child("im")) channel_from_json(*c, "rig.signal.im", rig.signal.im);
    if (const json* c = sr.child("fz")) channel_from_json(*c, "rig.signal.fz", rig.signal.fz);
    if (const json* c = sr.child("tz")) channel_from_json(*c, "rig.signal.tz", rig.signal.tz);
    sr.get("entry_tau_s", rig.signal.entry_tau_s);
    sr.get("exit_tau_s", rig.signal.exit_tau_s);
    sr.get("gap_s", rig.signal.gap_s);
    sr.get("noise_enabled", rig.signal.noise_enabled);
    sr.finish();
  }
  if (const json* w = r.child("wear_shape")) {
    ObjectReader wr(*w, "rig.wear_shape");
    wr.get("initial_um", rig.wear.initial_um);
    wr.get("break_in_um", rig.wear.break_in_um);
    wr.get("break_in_fraction", rig.wear.break_in_fraction);
    wr.get("steady_um", rig.wear.steady_um);
    wr.get("accel_um", rig.wear.accel_um);
    wr.get("accel_start", rig.wear.accel_start);
    wr.get("variation", rig.wear.variation);
    wr.finish();
  }
  r.finish();
}

json space_to_json(const tuner::SearchSpace& s) {
  json acts = json::array();
  for (auto a : s.activations) acts.push_back(neural::to_string(a));
  json regs = json::array();
  for (auto g : s.regularizers) regs.push_back(neural::to_string(g));
  return {{"min_layers", s.min_layers},
          {"max_layers", s.max_layers},
          {"min_units", s.min_units},
          {"max_units", s.max_units},
          {"units_step", s.units_step},
          {"activations", acts},
          {"max_dropout", s.max_dropout},
          {"max_recurrent_dropout", s.max_recurrent_dropout},
          {"regularizers", regs},
          {"regularization_factors", s.regularization_factors},
          {"min_learning_rate", s.min_learning_rate},
          {"max_learning_rate", s.max_learning_rate},
          {"batch_size", s.batch_size},
          {"patience", s.patience},
          {"min_delta", s.min_delta}};
}

void space_from_json(const json& j, tuner::SearchSpace& s) {
  ObjectReader r(j, "tuner.space");
  r.get("min_layers", s.min_layers);
  r.get("max_layers", s.max_layers);
  r.get("min_units", s.min_units);
  r.get("max_units", s.max_units);
  r.get("units_step", s.units_step);
  std::vector<std::string> names;
  if (r.get("activations", names)) {
    s.activations.clear();
    for (const auto& n : names) s.activations.push_back(neural::parse_activation(n));
  }
  r.get("max_dropout", s.max_dropout);
  r.get("max_recurrent_dropout", s.max_recurrent_dropout);
  if (r.get("regularizers", names)) {
    s.regularizers.clear();
    for (const auto& n : names) s.regularizers.push_back(neural::parse_regularizer(n));
  }
  r.get("regularization_factors", s.regularization_factors);
  r.get("min_learning_rate", s.min_learning_rate);
  r.get("max_learning_rate", s.max_learning_rate);
  r.get("batch_size", s.batch_size);
  r.get("patience", s.patience);
  r.get("min_delta", s.min_delta);
  r.finish();
}

}  // namespace

void PipelineConfig::validate() const {
  rig.validate();
  if (segmentation.method != "markers" && segmentation.method != "threshold") {
    throw ConfigError("segmentation.method must be 'markers' or 'threshold'");
  }
  if (segmentation.threshold.window_samples < 1) throw ConfigError("segmentation.window_samples must be >= 1");
  if (!(segmentation.threshold.threshold_ratio > 0.0 && segmentation.threshold.threshold_ratio < 1.0)) {
    throw ConfigError("segmentation.threshold_ratio must lie in (0, 1)");
  }
  try {
    features.band.validate(rig.sampling_rate_hz);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("features band: ") + e.what());
  }
  if (features.moving_average_window < 1) throw ConfigError("features.moving_average_window must be >= 1");
  for (const auto& label : features.drop) {
    if (std::find(features::kRawColumns.begin(), features::kRawColumns.end(), label) ==
        features::kRawColumns.end()) {
      throw ConfigError("features.drop names unknown column '" + label + "'");
    }
  }
  if (features.drop.size() >= features::kRawColumns.size()) {
    throw ConfigError("features.drop would remove every column");
  }
  if (!(quantize.jitter_um >= 0.0)) throw ConfigError("quantize.jitter_um must be >= 0");
  if (dataset.regions.empty()) throw ConfigError("dataset.regions must not be empty");
  dataset::validate_regions(dataset.regions);
  for (const auto& r : dataset.regions) {
    if (r.end_hole > rig.n_holes) {
      throw ConfigError("region '" + r.name + "' ends past n_holes");
    }
  }
  if (dataset.timestep < 1) throw ConfigError("dataset.timestep must be >= 1");
  dataset.split.validate();
  model.validate();
  tuner.space.validate();
  tuner.options.validate();
}

PipelineConfig default_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.rig.seed = seed;
  cfg.quantize.seed = seed;
  cfg.model.units = {64, 64};
  cfg.model.activation = neural::Activation::Tanh;
  cfg.model.dropout_rate = 0.1;
  cfg.model.recurrent_dropout_rate = 0.0;
  cfg.model.regularizer = neural::Regularizer::L2;
  cfg.model.regularization_factor = 1e-4;
  cfg.model.learning_rate = 1e-3;
  cfg.model.seed = seed;
  cfg.tuner.options.seed = seed;
  return cfg;
}

json to_json(const PipelineConfig& cfg) {
  json regions = json::array();
  for (const auto& r : cfg.dataset.regions) {
    regions.push_back({{"name", r.name}, {"start_hole", r.start_hole}, {"end_hole", r.end_hole}});
  }
  return {
      {"seed", cfg.seed},
      {"rig", rig_to_json(cfg.rig)},
      {"segmentation",
       {{"method", cfg.segmentation.method},
        {"window_samples", cfg.segmentation.threshold.window_samples},
        {"threshold_ratio", cfg.segmentation.threshold.threshold_ratio}}},
      {"features",
       {{"band_start_hz", cfg.features.band.start_hz},
        {"band_end_hz", cfg.features.band.end_hz},
        {"moving_average_window", cfg.features.moving_average_window},
        {"drop", cfg.features.drop}}},
      {"quantize", {{"jitter_um", cfg.quantize.jitter_um}, {"seed", cfg.quantize.seed}}},
      {"dataset",
       {{"regions", regions},
        {"timestep", cfg.dataset.timestep},
        {"split",
         {{"train", cfg.dataset.split.train_frac},
          {"val", cfg.dataset.split.val_frac},
          {"test", cfg.dataset.split.test_frac}}}}},
      {"model", io::to_json(cfg.model)},
      {"tuner",
       {{"enabled", cfg.tuner.enabled},
        {"n_trials", cfg.tuner.options.n_trials},
        {"rungs", cfg.tuner.options.rungs},
        {"keep_fraction", cfg.tuner.options.keep_fraction},
        {"seed", cfg.tuner.options.seed},
        {"space", space_to_json(cfg.tuner.space)}}},
  };
}

PipelineConfig from_json(const json& doc) {
  ObjectReader top(doc, "");
  std::uint64_t seed = 7;
  top.get("seed", seed);
  PipelineConfig cfg = default_config(seed);

  if (const json* j = top.child("rig")) rig_from_json(*j, cfg.rig);
  if (const json* j = top.child("segmentation")) {
    ObjectReader r(*j, "segmentation");
    r.get("method", cfg.segmentation.method);
    r.get("window_samples", cfg.segmentation.threshold.window_samples);
    r.get("threshold_ratio", cfg.segmentation.threshold.threshold_ratio);
    r.finish();
  }
  if (const json* j = top.child("features")) {
    ObjectReader r(*j, "features");
    r.get("band_start_hz", cfg.features.band.start_hz);
    r.get("band_end_hz", cfg.features.band.end_hz);
    r.get("moving_average_window", cfg.features.moving_average_window);
    r.get("drop", cfg.features.drop);
    r.finish();
  }
  if (const json* j = top.child("quantize")) {
    ObjectReader r(*j, "quantize");
    r.get("jitter_um", cfg.quantize.jitter_um);
    r.get("seed", cfg.quantize.seed);
    r.finish();
  }
  if (const json* j = top.child("dataset")) {
    ObjectReader r(*j, "dataset");
    if (const json* regions = r.child("regions")) {
      if (!regions->is_array()) throw ConfigError("dataset.regions must be an array");
      cfg.dataset.regions.clear();
      for (const auto& item : *regions) {
        ObjectReader rr(item, "dataset.regions[]");
        dataset::RegionSpec spec;
        rr.get("name", spec.name);
        rr.get("start_hole", spec.start_hole);
        rr.get("end_hole", spec.end_hole);
        rr.finish();
        cfg.dataset.regions.push_back(spec);
      }
    }
    r.get("timestep", cfg.dataset.timestep);
    if (const json* s = r.child("split")) {
      ObjectReader sr(*s, "dataset.split");
      sr.get("train", cfg.dataset.split.train_frac);
      sr.get("val", cfg.dataset.split.val_frac);
      sr.get("test", cfg.dataset.split.test_frac);
      sr.finish();
    }
    r.finish();
  }
  if (const json* j = top.child("model")) {
    json merged = io::to_json(cfg.model);
    if (!j->is_object()) throw ConfigError("'model' must be an object");
    for (const auto& [key, value] : j->items()) merged[key] = value;
    // hyperparameters_from_json rejects unknown keys, so typos in `j` still surface.
    for (const auto& [key, value] : j->items()) {
      if (!io::to_json(neural::Hyperparameters{}).contains(key)) {
        throw ConfigError("unknown configuration key 'model." + key + "'");
      }
    }
    cfg.model = io::hyperparameters_from_json(merged);
  }
  if (const json* j = top.child("tuner")) {
    ObjectReader r(*j, "tuner");
    r.get("enabled", cfg.tuner.enabled);
    r.get("n_trials", cfg.tuner.options.n_trials);
    r.get("rungs", cfg.tuner.options.rungs);
    r.get("keep_fraction", cfg.tuner.options.keep_fraction);
    r.get("seed", cfg.tuner.options.seed);
    if (const json* s = r.child("space")) space_from_json(*s, cfg.tuner.space);
    r.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) { return from_json(io::read_json(path)); }

void set_path(json& doc, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string key = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("malformed override key '" + dotted_key + "'");
    if (!node->is_object()) {
      if (node->is_null()) *node = json::object();
      else throw ConfigError("override '" + dotted_key + "' descends into a non-object");
    }
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

namespace {

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InternalError("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace

std::string config_hash(const PipelineConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

std::string data_hash(const PipelineConfig& cfg) {
  json j = to_json(cfg);
  j.erase("model");
  j.erase("tuner");
  return sha256_hex(j.dump());
}

}  // namespace toolwear::config
