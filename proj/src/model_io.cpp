#include "toolwear/model_io.hpp"

#include <fstream>

#include "toolwear/error.hpp"

namespace toolwear::io {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& what) {
  if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols) {
    throw DimensionError(what + " has shape " + j.at("rows").dump() + "x" + j.at("cols").dump() +
                         ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  const auto& data = j.at("data");
  if (data.size() != static_cast<std::size_t>(rows * cols)) {
    throw DimensionError(what + " has the wrong number of entries");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

json range_to_json(const dataset::Range& r) { return {{"min", r.min}, {"max", r.max}}; }
dataset::Range range_from_json(const json& j) {
  return {j.at("min").get<double>(), j.at("max").get<double>()};
}

template <typename F>
auto translate(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

json to_json(const dataset::ScalerParams& p) {
  json features = json::array();
  for (std::size_t i = 0; i < p.features.size(); ++i) {
    json f = range_to_json(p.features[i]);
    f["name"] = i < p.feature_names.size() ? p.feature_names[i] : "";
    f["degenerate"] = p.features[i].degenerate();
    features.push_back(std::move(f));
  }
  json target = range_to_json(p.target);
  target["degenerate"] = p.target.degenerate();
  return {{"features", std::move(features)}, {"target", std::move(target)}};
}

dataset::ScalerParams scaler_from_json(const json& j) {
  return translate("scaler", [&] {
    dataset::ScalerParams p;
    for (const auto& f : j.at("features")) {
      p.feature_names.push_back(f.at("name").get<std::string>());
      p.features.push_back(range_from_json(f));
    }
    p.target = range_from_json(j.at("target"));
    return p;
  });
}

json to_json(const neural::Hyperparameters& hp) {
  return {{"units", hp.units},
          {"activation", neural::to_string(hp.activation)},
          {"dropout_rate", hp.dropout_rate},
          {"recurrent_dropout_rate", hp.recurrent_dropout_rate},
          {"regularizer", neural::to_string(hp.regularizer)},
          {"regularization_factor", hp.regularization_factor},
          {"learning_rate", hp.learning_rate},
          {"max_epochs", hp.max_epochs},
          {"patience", hp.patience},
          {"batch_size", hp.batch_size},
          {"min_delta", hp.min_delta},
          {"seed", hp.seed}};
}

neural::Hyperparameters hyperparameters_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("hyperparameters must be an object");
  neural::Hyperparameters hp;
  translate("hyperparameters", [&] {
    for (const auto& [key, value] : j.items()) {
      if (key == "units") hp.units = value.get<std::vector<int>>();
      else if (key == "activation") hp.activation = neural::parse_activation(value.get<std::string>());
      else if (key == "dropout_rate") hp.dropout_rate = value.get<double>();
      else if (key == "recurrent_dropout_rate") hp.recurrent_dropout_rate = value.get<double>();
      else if (key == "regularizer") hp.regularizer = neural::parse_regularizer(value.get<std::string>());
      else if (key == "regularization_factor") hp.regularization_factor = value.get<double>();
      else if (key == "learning_rate") hp.learning_rate = value.get<double>();
      else if (key == "max_epochs") hp.max_epochs = value.get<int>();
      else if (key == "patience") hp.patience = value.get<int>();
      else if (key == "batch_size") hp.batch_size = value.get<int>();
      else if (key == "min_delta") hp.min_delta = value.get<double>();
      else if (key == "seed") hp.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown hyperparameter '" + key + "'");
    }
    return 0;
  });
  return hp;
}

json to_json(const neural::LstmModel& model) {
  json layers = json::array();
  for (const auto& l : model.params.layers) {
    layers.push_back({{"W", matrix_to_json(l.W)}, {"U", matrix_to_json(l.U)},
                      {"b", matrix_to_json(l.b)}});
  }
  json j = {{"version", kModelFormatVersion},
            {"gate_order", "ifgo"},
            {"input_dim", model.input_dim},
            {"hyperparameters", to_json(model.hp)},
            {"layers", std::move(layers)},
            {"dense", {{"w", matrix_to_json(model.params.w_out)}, {"b", model.params.b_out}}},
            {"training",
             {{"seed", model.training.seed},
              {"stopped_epoch", model.training.stopped_epoch},
              {"best_epoch", model.training.best_epoch}}}};
  j["scaler"] = model.scaler ? to_json(*model.scaler) : json(nullptr);
  return j;
}

neural::LstmModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw ConfigError("model file has no version field");
  if (j.at("version").get<int>() != kModelFormatVersion) {
    throw ConfigError("unsupported model format version " + j.at("version").dump());
  }
  return translate("model", [&] {
    neural::LstmModel m;
    m.hp = hyperparameters_from_json(j.at("hyperparameters"));
    m.hp.validate();
    m.input_dim = j.at("input_dim").get<std::size_t>();
    const auto& layers = j.at("layers");
    if (layers.size() != m.hp.n_layers()) throw DimensionError("model layer count mismatch");
    Eigen::Index in = static_cast<Eigen::Index>(m.input_dim);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const Eigen::Index u = m.hp.units[k];
      const std::string name = "layer" + std::to_string(k);
      neural::LayerParams l;
      l.W = matrix_from_json(layers[k].at("W"), 4 * u, in, name + ".W");
      l.U = matrix_from_json(layers[k].at("U"), 4 * u, u, name + ".U");
      l.b = matrix_from_json(layers[k].at("b"), 4 * u, 1, name + ".b");
      m.params.layers.push_back(std::move(l));
      in = u;
    }
    m.params.w_out = matrix_from_json(j.at("dense").at("w"), in, 1, "dense.w");
    m.params.b_out = j.at("dense").at("b").get<double>();
    const auto& t = j.at("training");
    m.training.seed = t.at("seed").get<std::uint64_t>();
    m.training.stopped_epoch = t.at("stopped_epoch").get<int>();
    m.training.best_epoch = t.at("best_epoch").get<int>();
    if (!j.at("scaler").is_null()) m.scaler = scaler_from_json(j.at("scaler"));
    return m;
  });
}

void save_model(const neural::LstmModel& model, const std::filesystem::path& path,
                const json& extra) {
  json j = to_json(model);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  write_json(j, path);
}

neural::LstmModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

json read_json(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ParseError(ParseError::Reason::MissingFile, path.string(), 0, "no such file");
  }
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseError::Reason::MalformedField, path.string(), 0, e.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace toolwear::io
