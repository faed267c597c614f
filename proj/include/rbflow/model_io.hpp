#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "rbflow/io_util.hpp"
#include "rbflow/network.hpp"
#include "rbflow/normalize.hpp"

namespace rbflow {

using Json = nlohmann::ordered_json;

/// A trained model plus everything inference needs: architecture spec,
/// normalization stats fitted on the training split, and the seed that
/// produced it.
struct ModelFile {
  NetworkSpec spec;
  RbfNetwork network;
  std::optional<NormStats> norm_stats;
  std::uint64_t seed = 0;
};

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("model json: matrix must be a non-empty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw ParseError("model json: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace detail

inline Json norm_stats_to_json(const NormStats& stats) {
  Json j;
  j["feature_min"] = stats.feature_min;
  j["feature_max"] = stats.feature_max;
  j["degenerate"] = stats.degenerate;
  j["flow_lo"] = stats.flow_lo;
  j["flow_hi"] = stats.flow_hi;
  return j;
}

inline NormStats norm_stats_from_json(const Json& j) {
  NormStats stats;
  stats.feature_min = j.at("feature_min").get<Vector>();
  stats.feature_max = j.at("feature_max").get<Vector>();
  stats.degenerate = j.at("degenerate").get<std::vector<std::uint8_t>>();
  stats.flow_lo = j.at("flow_lo").get<double>();
  stats.flow_hi = j.at("flow_hi").get<double>();
  if (stats.feature_max.size() != stats.feature_min.size() ||
      stats.degenerate.size() != stats.feature_min.size()) {
    throw ParseError("model json: norm_stats arrays differ in length");
  }
  return stats;
}

inline Json model_to_json(const ModelFile& model) {
  Json j;
  j["spec"] = {
      {"input_dim", model.spec.input_dim},
      {"hidden_unit_counts", model.spec.hidden_unit_counts},
      {"hidden_output_dims", model.spec.hidden_output_dims},
      {"default_width", model.spec.default_width},
      {"output_dim", model.spec.output_dim},
      {"output_activation", to_string(model.spec.output_activation)},
  };
  Json layers = Json::array();
  for (const RbfLayer& layer : model.network.hidden_layers) {
    Json centers = Json::array();
    Json widths = Json::array();
    for (const RbfUnit& u : layer.units) {
      centers.push_back(u.center);
      widths.push_back(u.width);
    }
    layers.push_back({
        {"centers", std::move(centers)},
        {"widths", std::move(widths)},
        {"weights", detail::matrix_to_json(layer.weights)},
        {"biases", layer.biases},
    });
  }
  j["layers"] = std::move(layers);
  j["output"] = {
      {"weights", detail::matrix_to_json(model.network.output_weights)},
      {"biases", model.network.output_biases},
      {"activation", to_string(model.network.output_activation)},
  };
  if (model.norm_stats) j["norm_stats"] = norm_stats_to_json(*model.norm_stats);
  j["seed"] = model.seed;
  return j;
}

inline ModelFile model_from_json(const Json& j) {
  ModelFile model;
  const Json& spec = j.at("spec");
  model.spec.input_dim = spec.at("input_dim").get<std::size_t>();
  model.spec.hidden_unit_counts = spec.at("hidden_unit_counts").get<std::vector<std::size_t>>();
  model.spec.hidden_output_dims = spec.at("hidden_output_dims").get<std::vector<std::size_t>>();
  model.spec.default_width = spec.at("default_width").get<double>();
  model.spec.output_dim = spec.at("output_dim").get<std::size_t>();
  model.spec.output_activation =
      activation_from_string(spec.at("output_activation").get<std::string>());

  model.network.input_dim = model.spec.input_dim;
  model.network.output_activation =
      activation_from_string(j.at("output").at("activation").get<std::string>());
  if (model.network.output_activation != model.spec.output_activation) {
    throw ParseError("model json: spec and output activations disagree");
  }
  for (const Json& jl : j.at("layers")) {
    RbfLayer layer;
    const Json& centers = jl.at("centers");
    const Json& widths = jl.at("widths");
    if (centers.size() != widths.size()) {
      throw ParseError("model json: centers and widths differ in length");
    }
    layer.units.resize(centers.size());
    for (std::size_t u = 0; u < layer.units.size(); ++u) {
      layer.units[u].center = centers[u].get<Vector>();
      layer.units[u].width = widths[u].get<double>();
    }
    layer.weights = detail::matrix_from_json(jl.at("weights"));
    layer.biases = jl.at("biases").get<Vector>();
    model.network.hidden_layers.push_back(std::move(layer));
  }
  model.network.output_weights = detail::matrix_from_json(j.at("output").at("weights"));
  model.network.output_biases = j.at("output").at("biases").get<Vector>();
  if (j.contains("norm_stats")) model.norm_stats = norm_stats_from_json(j.at("norm_stats"));
  model.seed = j.at("seed").get<std::uint64_t>();

  validate(model.spec);
  validate(model.network);
  if (spec_of(model.network).hidden_unit_counts != model.spec.hidden_unit_counts) {
    throw ParseError("model json: layer shapes disagree with spec");
  }
  return model;
}

/// Doubles survive save/load exactly: the writer emits the shortest decimal
/// form that round-trips the 64-bit value.
inline void save_model(const ModelFile& model, const std::string& path) {
  atomic_write(path, model_to_json(model).dump(2) + "\n");
}

inline ModelFile load_model(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace rbflow
