#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rbflow/error.hpp"
#include "rbflow/linalg.hpp"
#include "rbflow/rng.hpp"

namespace rbflow {

enum class Activation { Linear, Sigmoid, Softmax };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
  }
  return "linear";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "softmax") return Activation::Softmax;
  throw ParseError("unknown activation: " + s);
}

/// One Gaussian kernel unit: a center in the layer's input space and a
/// positive width.
struct RbfUnit {
  Vector center;
  double width = 1.0;

  friend bool operator==(const RbfUnit&, const RbfUnit&) = default;
};

/// A hidden layer: a bank of RBF units followed by an affine map.
/// weights is (output_dim x unit_count); biases has length output_dim.
struct RbfLayer {
  std::vector<RbfUnit> units;
  Matrix weights;
  Vector biases;

  std::size_t unit_count() const { return units.size(); }
  std::size_t input_dim() const { return units.empty() ? 0 : units.front().center.size(); }
  std::size_t output_dim() const { return biases.size(); }

  friend bool operator==(const RbfLayer&, const RbfLayer&) = default;
};

/// A stack of hidden RBF layers ending in an affine output layer with a
/// configurable activation. Values are immutable in use; every operation on a
/// network is a pure function returning new values.
struct RbfNetwork {
  std::size_t input_dim = 0;
  std::vector<RbfLayer> hidden_layers;
  Matrix output_weights;
  Vector output_biases;
  Activation output_activation = Activation::Linear;

  std::size_t output_dim() const { return output_biases.size(); }
  std::size_t last_hidden_dim() const {
    return hidden_layers.empty() ? input_dim : hidden_layers.back().output_dim();
  }

  friend bool operator==(const RbfNetwork&, const RbfNetwork&) = default;
};

/// Architecture hyperparameters: unit counts and affine output dims per
/// hidden layer, one default width applied to every unit at init.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_unit_counts;
  std::vector<std::size_t> hidden_output_dims;
  double default_width = 1.0;
  std::size_t output_dim = 1;
  Activation output_activation = Activation::Linear;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Every intermediate vector of one forward pass; consumed by backprop.
struct ForwardTrace {
  Vector input;
  std::vector<Vector> rbf_activations;  // a, per hidden layer
  std::vector<Vector> affine_outputs;   // z, per hidden layer
  Vector output_pre_activation;
  Vector output;
};

inline void validate(const NetworkSpec& spec) {
  if (spec.input_dim < 1) throw ValueError("network spec: input_dim must be >= 1");
  if (spec.output_dim < 1) throw ValueError("network spec: output_dim must be >= 1");
  if (spec.hidden_unit_counts.size() != spec.hidden_output_dims.size()) {
    throw ValueError("network spec: hidden_unit_counts and hidden_output_dims differ in length");
  }
  for (std::size_t n : spec.hidden_unit_counts) {
    if (n < 1) throw ValueError("network spec: every hidden layer needs >= 1 unit");
  }
  for (std::size_t n : spec.hidden_output_dims) {
    if (n < 1) throw ValueError("network spec: every hidden layer output dim must be >= 1");
  }
  if (!(spec.default_width > 0.0)) throw ValueError("network spec: default_width must be > 0");
}

/// Checks the dimension-chaining invariants; throws on the first violation.
inline void validate(const RbfNetwork& net) {
  if (net.input_dim < 1) throw ValueError("network: input_dim must be >= 1");
  std::size_t in_dim = net.input_dim;
  for (std::size_t li = 0; li < net.hidden_layers.size(); ++li) {
    const RbfLayer& layer = net.hidden_layers[li];
    const std::string tag = "network layer " + std::to_string(li);
    if (layer.units.empty()) throw ValueError(tag + ": no units");
    for (const RbfUnit& u : layer.units) {
      if (u.center.size() != in_dim) {
        throw DimensionError(tag + ": unit center dim " + std::to_string(u.center.size()) +
                             " != layer input dim " + std::to_string(in_dim));
      }
      if (!(u.width > 0.0)) throw ValueError(tag + ": unit width must be > 0");
    }
    if (layer.weights.cols() != layer.unit_count()) {
      throw DimensionError(tag + ": weight columns != unit count");
    }
    if (layer.weights.rows() != layer.biases.size()) {
      throw DimensionError(tag + ": weight rows != bias length");
    }
    in_dim = layer.output_dim();
  }
  if (net.output_weights.cols() != in_dim) {
    throw DimensionError("network: output weight columns != last hidden dim");
  }
  if (net.output_weights.rows() != net.output_biases.size()) {
    throw DimensionError("network: output weight rows != output bias length");
  }
}

/// Derives the architecture of an existing network.
inline NetworkSpec spec_of(const RbfNetwork& net) {
  NetworkSpec spec;
  spec.input_dim = net.input_dim;
  for (const RbfLayer& layer : net.hidden_layers) {
    spec.hidden_unit_counts.push_back(layer.unit_count());
    spec.hidden_output_dims.push_back(layer.output_dim());
  }
  spec.default_width = net.hidden_layers.empty() || net.hidden_layers.front().units.empty()
                           ? 1.0
                           : net.hidden_layers.front().units.front().width;
  spec.output_dim = net.output_dim();
  spec.output_activation = net.output_activation;
  return spec;
}

/// Gaussian kernel exp(-|x-c|^2 / (2 sigma^2)); 1 exactly when x = c,
/// strictly decreasing in the distance.
inline double gaussian_rbf(const Vector& x, const Vector& c, double sigma) {
  if (x.size() != c.size()) {
    throw DimensionError("gaussian_rbf: input dim " + std::to_string(x.size()) +
                         " != center dim " + std::to_string(c.size()));
  }
  if (!(sigma > 0.0)) throw ValueError("gaussian_rbf: sigma must be > 0");
  return std::exp(-squared_distance(x, c) / (2.0 * sigma * sigma));
}

inline Vector output_activation_apply(const Vector& z, Activation kind) {
  if (z.empty()) throw ValueError("output_activation_apply: empty vector");
  Vector out(z.size());
  switch (kind) {
    case Activation::Linear:
      out = z;
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < z.size(); ++i) {
        // Split by sign to avoid overflow in exp.
        if (z[i] >= 0.0) {
          out[i] = 1.0 / (1.0 + std::exp(-z[i]));
        } else {
          const double e = std::exp(z[i]);
          out[i] = e / (1.0 + e);
        }
      }
      break;
    case Activation::Softmax: {
      double zmax = z[0];
      for (double v : z) zmax = std::max(zmax, v);
      double sum = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - zmax);
        sum += out[i];
      }
      for (double& v : out) v /= sum;
      break;
    }
  }
  return out;
}

struct LayerSignals {
  Vector rbf_activations;
  Vector affine_output;
};

/// Kernel bank then affine: a_j = rbf(input, c_j, sigma_j), z = W a + b.
inline LayerSignals rbf_layer_forward(const Vector& input, const RbfLayer& layer) {
  if (layer.units.empty()) throw ValueError("rbf_layer_forward: layer has no units");
  if (input.size() != layer.input_dim()) {
    throw DimensionError("rbf_layer_forward: input dim " + std::to_string(input.size()) +
                         " != layer input dim " + std::to_string(layer.input_dim()));
  }
  LayerSignals s;
  s.rbf_activations.resize(layer.unit_count());
  for (std::size_t j = 0; j < layer.unit_count(); ++j) {
    s.rbf_activations[j] = gaussian_rbf(input, layer.units[j].center, layer.units[j].width);
  }
  s.affine_output = matvec(layer.weights, s.rbf_activations);
  for (std::size_t r = 0; r < s.affine_output.size(); ++r) s.affine_output[r] += layer.biases[r];
  return s;
}

/// Full deterministic forward pass recording every intermediate vector.
inline ForwardTrace network_forward(const Vector& input, const RbfNetwork& net) {
  if (input.size() != net.input_dim) {
    throw DimensionError("network_forward: input dim " + std::to_string(input.size()) +
                         " != network input dim " + std::to_string(net.input_dim));
  }
  ForwardTrace trace;
  trace.input = input;
  const Vector* current = &trace.input;
  for (const RbfLayer& layer : net.hidden_layers) {
    LayerSignals s = rbf_layer_forward(*current, layer);
    trace.rbf_activations.push_back(std::move(s.rbf_activations));
    trace.affine_outputs.push_back(std::move(s.affine_output));
    current = &trace.affine_outputs.back();
  }
  trace.output_pre_activation = matvec(net.output_weights, *current);
  for (std::size_t r = 0; r < trace.output_pre_activation.size(); ++r) {
    trace.output_pre_activation[r] += net.output_biases[r];
  }
  trace.output = output_activation_apply(trace.output_pre_activation, net.output_activation);
  return trace;
}

/// Center initialization strategies. RandomUniformCenters draws each
/// component in [lo, hi]; SampleFromData picks rows of the dataset (layers
/// past the first sample from the dataset propagated through the layers
/// already built, since raw rows live in input space only).
struct RandomUniformCenters {
  double lo = 0.0;
  double hi = 1.0;
};
struct SampleFromData {
  const std::vector<Vector>* points = nullptr;
};
using CenterStrategy = std::variant<RandomUniformCenters, SampleFromData>;

/// Builds a fresh network: centers per strategy, widths = spec default,
/// weights uniform in [-w0, +w0], biases zero. w0 defaults to 1/sqrt(fan_in)
/// per layer; pass weight_scale to override (0 gives all-zero weights).
inline RbfNetwork init_network(const NetworkSpec& spec, Rng& rng, const CenterStrategy& strategy,
                               std::optional<double> weight_scale = std::nullopt) {
  validate(spec);
  const auto* sample = std::get_if<SampleFromData>(&strategy);
  if (sample != nullptr) {
    if (sample->points == nullptr || sample->points->empty()) {
      throw ValueError("init_network: sample_from_data needs a non-empty dataset");
    }
    for (const Vector& p : *sample->points) {
      if (p.size() != spec.input_dim) {
        throw DimensionError("init_network: dataset point dim " + std::to_string(p.size()) +
                             " != spec input dim " + std::to_string(spec.input_dim));
      }
    }
  }
  if (const auto* uni = std::get_if<RandomUniformCenters>(&strategy); uni && uni->lo > uni->hi) {
    throw ValueError("init_network: center range lo > hi");
  }
  if (weight_scale && *weight_scale < 0.0) {
    throw ValueError("init_network: weight_scale must be >= 0");
  }

  auto fill_weights = [&](Matrix& w, std::size_t fan_in) {
    const double w0 = weight_scale ? *weight_scale : 1.0 / std::sqrt(static_cast<double>(fan_in));
    if (w0 == 0.0) return;  // degenerate bound: leave zeros, draw nothing
    std::uniform_real_distribution<double> dist(-w0, w0);
    for (double& v : w.data()) v = dist(rng);
  };

  RbfNetwork net;
  net.input_dim = spec.input_dim;
  net.output_activation = spec.output_activation;

  // Dataset rows propagated through the layers built so far; centers of
  // layer i are sampled from this pool when the strategy is SampleFromData.
  std::vector<Vector> pool;
  if (sample != nullptr) pool = *sample->points;

  std::size_t in_dim = spec.input_dim;
  for (std::size_t li = 0; li < spec.hidden_unit_counts.size(); ++li) {
    const std::size_t units = spec.hidden_unit_counts[li];
    const std::size_t out_dim = spec.hidden_output_dims[li];
    RbfLayer layer;
    layer.units.resize(units);
    for (RbfUnit& u : layer.units) {
      u.width = spec.default_width;
      u.center.resize(in_dim);
      if (sample != nullptr) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        u.center = pool[pick(rng)];
      } else {
        const auto& uni = std::get<RandomUniformCenters>(strategy);
        std::uniform_real_distribution<double> dist(uni.lo, uni.hi);
        for (double& v : u.center) v = dist(rng);
      }
    }
    layer.weights = Matrix(out_dim, units);
    fill_weights(layer.weights, units);
    layer.biases.assign(out_dim, 0.0);
    if (sample != nullptr) {
      for (Vector& p : pool) p = rbf_layer_forward(p, layer).affine_output;
    }
    net.hidden_layers.push_back(std::move(layer));
    in_dim = out_dim;
  }

  net.output_weights = Matrix(spec.output_dim, in_dim);
  fill_weights(net.output_weights, in_dim);
  net.output_biases.assign(spec.output_dim, 0.0);
  validate(net);
  return net;
}

}  // namespace rbflow
