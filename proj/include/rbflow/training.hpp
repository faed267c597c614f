#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rbflow/network.hpp"

namespace rbflow {

enum class LossKind { Mse, CrossEntropy };

inline const char* to_string(LossKind k) {
  return k == LossKind::Mse ? "mse" : "cross_entropy";
}

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mse") return LossKind::Mse;
  if (s == "cross_entropy") return LossKind::CrossEntropy;
  throw ParseError("unknown loss kind: " + s);
}

enum class BatchMode { FullBatch, PerSample };

struct ConvergenceCriterion {
  double min_delta = 1e-9;
  std::size_t patience = 10;
};

struct TrainingConfig {
  double learning_rate = 0.01;
  std::size_t num_epochs = 100;
  LossKind loss_kind = LossKind::Mse;
  BatchMode batch_mode = BatchMode::FullBatch;
  std::optional<ConvergenceCriterion> convergence;
  std::uint64_t seed = 0;
};

inline void validate(const TrainingConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0)) throw ValueError("training config: learning_rate must be >= 0");
  if (cfg.num_epochs < 1) throw ValueError("training config: num_epochs must be >= 1");
}

/// Mean training loss per epoch; val_loss stays empty unless a validation
/// set was supplied. Shorter than num_epochs when early stop triggers.
struct LossHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

struct Sample {
  Vector features;
  Vector target;
};
using SampleSet = std::vector<Sample>;

/// Gradient of the loss w.r.t. every weight and bias; centers and widths are
/// frozen geometry and receive no gradient.
struct Gradients {
  std::vector<Matrix> hidden_weights;
  std::vector<Vector> hidden_biases;
  Matrix output_weights;
  Vector output_biases;
};

namespace detail {
inline constexpr double kProbClamp = 1e-12;  // cross-entropy probability guard

inline double clamp_prob(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

inline void check_binary_label(double y) {
  if (y != 0.0 && y != 1.0) throw ValueError("cross_entropy_loss: binary label must be 0 or 1");
}

inline void check_one_hot(const Vector& t) {
  std::size_t ones = 0;
  for (double v : t) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw ValueError("cross_entropy_loss: labels must be one-hot (components 0 or 1)");
    }
  }
  if (ones != 1) throw ValueError("cross_entropy_loss: one-hot label needs exactly one 1");
}
}  // namespace detail

/// Mean of (pred - actual)^2 over all scalar components.
inline double mse_loss(const Vector& predicted, const Vector& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DimensionError("mse_loss: shapes differ or empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted.size());
}

inline double mse_loss(const std::vector<Vector>& predicted, const std::vector<Vector>& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DimensionError("mse_loss: batch shapes differ or empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) acc += mse_loss(predicted[i], actual[i]);
  return acc / static_cast<double>(predicted.size());
}

/// Multiclass: -sum t_k ln p_k over a one-hot label. Scalar output: the
/// binary form -[y ln p + (1-y) ln(1-p)]. Probabilities are clamped to
/// [1e-12, 1-1e-12] before the logs.
inline double cross_entropy_loss(const Vector& predicted, const Vector& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DimensionError("cross_entropy_loss: shapes differ or empty");
  }
  if (predicted.size() == 1) {
    detail::check_binary_label(actual[0]);
    const double p = detail::clamp_prob(predicted[0]);
    return -(actual[0] * std::log(p) + (1.0 - actual[0]) * std::log(1.0 - p));
  }
  detail::check_one_hot(actual);
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (actual[i] != 0.0) acc -= actual[i] * std::log(detail::clamp_prob(predicted[i]));
  }
  return acc;
}

inline double cross_entropy_loss(const std::vector<Vector>& predicted,
                                 const std::vector<Vector>& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DimensionError("cross_entropy_loss: batch shapes differ or empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    acc += cross_entropy_loss(predicted[i], actual[i]);
  }
  return acc / static_cast<double>(predicted.size());
}

inline double loss_value(const Vector& predicted, const Vector& actual, LossKind kind) {
  return kind == LossKind::Mse ? mse_loss(predicted, actual)
                               : cross_entropy_loss(predicted, actual);
}

/// Mean loss of a network over a sample set; shared by the trainer and the
/// genetic optimizer's fitness so the two agree exactly.
inline double dataset_loss(const RbfNetwork& net, const SampleSet& samples, LossKind kind) {
  if (samples.empty()) throw ValueError("dataset_loss: empty sample set");
  double acc = 0.0;
  for (const Sample& s : samples) {
    acc += loss_value(network_forward(s.features, net).output, s.target, kind);
  }
  return acc / static_cast<double>(samples.size());
}

namespace detail {

/// dL/dy for one sample.
inline Vector loss_output_gradient(const Vector& y, const Vector& t, LossKind kind) {
  Vector g(y.size(), 0.0);
  if (kind == LossKind::Mse) {
    const double scale = 2.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = scale * (y[i] - t[i]);
    return g;
  }
  if (y.size() == 1) {
    const double p = clamp_prob(y[0]);
    g[0] = -t[0] / p + (1.0 - t[0]) / (1.0 - p);
    return g;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (t[i] != 0.0) g[i] = -t[i] / clamp_prob(y[i]);
  }
  return g;
}

/// dL/dy pushed through the output activation to dL/dz (pre-activation).
inline Vector through_activation(const Vector& g, const Vector& y, Activation kind) {
  Vector out(g.size(), 0.0);
  switch (kind) {
    case Activation::Linear:
      out = g;
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * y[i] * (1.0 - y[i]);
      break;
    case Activation::Softmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
      for (std::size_t i = 0; i < g.size(); ++i) out[i] = y[i] * (g[i] - dot);
      break;
    }
  }
  return out;
}

inline Matrix outer(const Vector& a, const Vector& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < b.size(); ++c) m(r, c) = a[r] * b[c];
  }
  return m;
}

}  // namespace detail

/// Analytic gradients of the loss w.r.t. all weights and biases, chained
/// through every affine map and RBF kernel bank from output to first layer.
inline Gradients backprop(const RbfNetwork& net, const ForwardTrace& trace, const Vector& target,
                          LossKind loss_kind) {
  if (target.size() != net.output_dim()) {
    throw DimensionError("backprop: target dim " + std::to_string(target.size()) +
                         " != output dim " + std::to_string(net.output_dim()));
  }
  if (trace.rbf_activations.size() != net.hidden_layers.size() ||
      trace.output.size() != net.output_dim() || trace.input.size() != net.input_dim) {
    throw DimensionError("backprop: trace does not match network shape");
  }

  Gradients grads;
  grads.hidden_weights.resize(net.hidden_layers.size());
  grads.hidden_biases.resize(net.hidden_layers.size());

  const Vector g_output =
      detail::loss_output_gradient(trace.output, target, loss_kind);
  const Vector g_pre =
      detail::through_activation(g_output, trace.output, net.output_activation);

  const Vector& last_activation =
      net.hidden_layers.empty() ? trace.input : trace.affine_outputs.back();
  grads.output_weights = detail::outer(g_pre, last_activation);
  grads.output_biases = g_pre;

  // dL/dz of the last hidden layer's affine output.
  Vector g_z = matvec_transposed(net.output_weights, g_pre);

  for (std::size_t li = net.hidden_layers.size(); li-- > 0;) {
    const RbfLayer& layer = net.hidden_layers[li];
    const Vector& a = trace.rbf_activations[li];
    const Vector& u = li == 0 ? trace.input : trace.affine_outputs[li - 1];

    grads.hidden_weights[li] = detail::outer(g_z, a);
    grads.hidden_biases[li] = g_z;

    if (li == 0) break;  // nothing upstream of the first layer's kernels

    // Through the affine map to dL/da, then through the Gaussian kernels to
    // the layer input: da_j/du = a_j * (c_j - u) / sigma_j^2.
    const Vector g_a = matvec_transposed(layer.weights, g_z);
    Vector g_u(u.size(), 0.0);
    for (std::size_t j = 0; j < layer.unit_count(); ++j) {
      const RbfUnit& unit = layer.units[j];
      const double scale = g_a[j] * a[j] / (unit.width * unit.width);
      for (std::size_t i = 0; i < u.size(); ++i) g_u[i] += scale * (unit.center[i] - u[i]);
    }
    g_z = std::move(g_u);
  }
  return grads;
}

/// Central-difference gradients over every weight and bias: the independent
/// oracle for backprop. Only touches the forward pass and the loss.
inline Gradients finite_difference_gradients(const RbfNetwork& net, const Vector& input,
                                             const Vector& target, LossKind loss_kind,
                                             double eps = 1e-6) {
  if (!(eps > 0.0)) throw ValueError("finite_difference_gradients: eps must be > 0");
  RbfNetwork probe = net;
  const auto loss_at = [&]() {
    return loss_value(network_forward(input, probe).output, target, loss_kind);
  };
  const auto central = [&](double& param) {
    const double saved = param;
    param = saved + eps;
    const double up = loss_at();
    param = saved - eps;
    const double down = loss_at();
    param = saved;
    return (up - down) / (2.0 * eps);
  };

  Gradients grads;
  grads.hidden_weights.resize(net.hidden_layers.size());
  grads.hidden_biases.resize(net.hidden_layers.size());
  for (std::size_t li = 0; li < net.hidden_layers.size(); ++li) {
    RbfLayer& layer = probe.hidden_layers[li];
    grads.hidden_weights[li] = Matrix(layer.weights.rows(), layer.weights.cols());
    for (std::size_t k = 0; k < layer.weights.data().size(); ++k) {
      grads.hidden_weights[li].data()[k] = central(layer.weights.data()[k]);
    }
    grads.hidden_biases[li].resize(layer.biases.size());
    for (std::size_t k = 0; k < layer.biases.size(); ++k) {
      grads.hidden_biases[li][k] = central(layer.biases[k]);
    }
  }
  grads.output_weights = Matrix(net.output_weights.rows(), net.output_weights.cols());
  for (std::size_t k = 0; k < probe.output_weights.data().size(); ++k) {
    grads.output_weights.data()[k] = central(probe.output_weights.data()[k]);
  }
  grads.output_biases.resize(net.output_biases.size());
  for (std::size_t k = 0; k < probe.output_biases.size(); ++k) {
    grads.output_biases[k] = central(probe.output_biases[k]);
  }
  return grads;
}

/// One descent step on every weight and bias; centers and widths untouched.
/// Returns a new network value.
inline RbfNetwork sgd_update(const RbfNetwork& net, const Gradients& grads, double learning_rate) {
  if (!(learning_rate >= 0.0)) throw ValueError("sgd_update: learning_rate must be >= 0");
  if (grads.hidden_weights.size() != net.hidden_layers.size() ||
      grads.hidden_biases.size() != net.hidden_layers.size() ||
      grads.output_weights.rows() != net.output_weights.rows() ||
      grads.output_weights.cols() != net.output_weights.cols() ||
      grads.output_biases.size() != net.output_biases.size()) {
    throw DimensionError("sgd_update: gradient shapes do not match network");
  }
  RbfNetwork out = net;
  for (std::size_t li = 0; li < out.hidden_layers.size(); ++li) {
    RbfLayer& layer = out.hidden_layers[li];
    const Matrix& gw = grads.hidden_weights[li];
    const Vector& gb = grads.hidden_biases[li];
    if (gw.rows() != layer.weights.rows() || gw.cols() != layer.weights.cols() ||
        gb.size() != layer.biases.size()) {
      throw DimensionError("sgd_update: layer " + std::to_string(li) + " gradient shape mismatch");
    }
    for (std::size_t k = 0; k < layer.weights.data().size(); ++k) {
      layer.weights.data()[k] -= learning_rate * gw.data()[k];
    }
    for (std::size_t k = 0; k < layer.biases.size(); ++k) {
      layer.biases[k] -= learning_rate * gb[k];
    }
  }
  for (std::size_t k = 0; k < out.output_weights.data().size(); ++k) {
    out.output_weights.data()[k] -= learning_rate * grads.output_weights.data()[k];
  }
  for (std::size_t k = 0; k < out.output_biases.size(); ++k) {
    out.output_biases[k] -= learning_rate * grads.output_biases[k];
  }
  return out;
}

namespace detail {

inline void accumulate(Gradients& into, const Gradients& g) {
  if (into.hidden_weights.empty() && into.output_weights.empty() && into.output_biases.empty()) {
    into = g;
    return;
  }
  for (std::size_t li = 0; li < g.hidden_weights.size(); ++li) {
    for (std::size_t k = 0; k < g.hidden_weights[li].data().size(); ++k) {
      into.hidden_weights[li].data()[k] += g.hidden_weights[li].data()[k];
    }
    for (std::size_t k = 0; k < g.hidden_biases[li].size(); ++k) {
      into.hidden_biases[li][k] += g.hidden_biases[li][k];
    }
  }
  for (std::size_t k = 0; k < g.output_weights.data().size(); ++k) {
    into.output_weights.data()[k] += g.output_weights.data()[k];
  }
  for (std::size_t k = 0; k < g.output_biases.size(); ++k) {
    into.output_biases[k] += g.output_biases[k];
  }
}

inline void scale(Gradients& g, double factor) {
  for (auto& m : g.hidden_weights) {
    for (double& v : m.data()) v *= factor;
  }
  for (auto& b : g.hidden_biases) {
    for (double& v : b) v *= factor;
  }
  for (double& v : g.output_weights.data()) v *= factor;
  for (double& v : g.output_biases) v *= factor;
}

}  // namespace detail

struct TrainResult {
  RbfNetwork network;
  LossHistory history;
};

/// Epoch loop: forward, loss, backprop, update. Full-batch mode averages the
/// gradient over all samples and takes one step per epoch; per-sample mode
/// updates after every sample in a seed-shuffled order. The recorded epoch
/// loss is measured before that epoch's update(s), so epoch 0 of an lr->0
/// run reports the initial loss.
inline TrainResult train(const RbfNetwork& net, const SampleSet& train_set,
                         const TrainingConfig& config, const SampleSet* val_set = nullptr) {
  validate(config);
  if (train_set.empty()) throw ValueError("train: empty training set");
  for (const Sample& s : train_set) {
    if (s.features.size() != net.input_dim || s.target.size() != net.output_dim()) {
      throw DimensionError("train: sample shape does not match network");
    }
  }

  TrainResult result;
  result.network = net;
  Rng rng = make_rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;

  for (std::size_t epoch = 0; epoch < config.num_epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (config.batch_mode == BatchMode::FullBatch) {
      Gradients mean_grads;
      for (const Sample& s : train_set) {
        const ForwardTrace trace = network_forward(s.features, result.network);
        epoch_loss += loss_value(trace.output, s.target, config.loss_kind);
        detail::accumulate(mean_grads, backprop(result.network, trace, s.target, config.loss_kind));
      }
      detail::scale(mean_grads, 1.0 / static_cast<double>(train_set.size()));
      epoch_loss /= static_cast<double>(train_set.size());
      if (!std::isfinite(epoch_loss)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      result.network = sgd_update(result.network, mean_grads, config.learning_rate);
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t idx : order) {
        const Sample& s = train_set[idx];
        const ForwardTrace trace = network_forward(s.features, result.network);
        const double sample_loss = loss_value(trace.output, s.target, config.loss_kind);
        if (!std::isfinite(sample_loss)) {
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
        }
        epoch_loss += sample_loss;
        const Gradients g = backprop(result.network, trace, s.target, config.loss_kind);
        result.network = sgd_update(result.network, g, config.learning_rate);
      }
      epoch_loss /= static_cast<double>(train_set.size());
    }
    result.history.train_loss.push_back(epoch_loss);
    if (val_set != nullptr && !val_set->empty()) {
      result.history.val_loss.push_back(dataset_loss(result.network, *val_set, config.loss_kind));
    }

    if (config.convergence) {
      if (best_loss - epoch_loss < config.convergence->min_delta) {
        ++stall;
      } else {
        stall = 0;
      }
      best_loss = std::min(best_loss, epoch_loss);
      if (stall >= config.convergence->patience) break;
    }
  }
  return result;
}

}  // namespace rbflow
