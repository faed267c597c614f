#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbflow/config.hpp"
#include "rbflow/dataset.hpp"
#include "rbflow/evaluate.hpp"
#include "rbflow/genetic.hpp"
#include "rbflow/model_io.hpp"
#include "rbflow/normalize.hpp"
#include "rbflow/training.hpp"

namespace rbflow {

enum class TrainMode { Backprop, Ga, Hybrid };

inline TrainMode train_mode_from_string(const std::string& s) {
  if (s == "backprop") return TrainMode::Backprop;
  if (s == "ga") return TrainMode::Ga;
  if (s == "hybrid") return TrainMode::Hybrid;
  throw ParseError("unknown train mode: " + s);
}

inline const char* to_string(TrainMode m) {
  switch (m) {
    case TrainMode::Backprop: return "backprop";
    case TrainMode::Ga: return "ga";
    case TrainMode::Hybrid: return "hybrid";
  }
  return "backprop";
}

/// The whole run configuration, typed. Every value has a default so an empty
/// file is a valid config; the hash covers the effective (post-override)
/// key/value text.
struct AppConfig {
  std::uint64_t seed = 42;
  Task task = Task::Regression;

  SynthConfig synth;
  FeatureSpec features;  // flow scale filled from the training split later
  DensityProfile profile;
  CongestionThresholds thresholds;

  std::vector<std::size_t> hidden_units = {16};
  std::vector<std::size_t> hidden_dims = {16};
  double sigma = 0.8;
  std::string center_strategy = "sample_from_data";  // or "random_uniform"

  TrainingConfig training;
  GaConfig ga;
  CleanPolicy clean_policy;

  double train_ratio = 0.8;
  SplitMode split_mode = SplitMode::Chronological;

  std::string config_hash;
};

/// Seed precedence: command-line override, then RBF_SEED, then the file. The
/// hash names the effective configuration after overrides.
inline AppConfig load_app_config(ConfigMap cfg, std::optional<std::uint64_t> seed_override = {}) {
  apply_seed_override(cfg);
  if (seed_override) cfg.set_double("seed", static_cast<double>(*seed_override));

  AppConfig app;
  app.config_hash = cfg.hash();
  app.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  app.task = task_from_string(cfg.get_string("task", "regression"));

  app.synth.duration_days = cfg.get_double("synth.duration_days", app.synth.duration_days);
  app.synth.interval_minutes =
      cfg.get_double("synth.interval_minutes", app.synth.interval_minutes);
  app.synth.base_flow = cfg.get_double("synth.base_flow", app.synth.base_flow);
  {
    const std::vector<double> centers = cfg.get_list("synth.rush_centers", {8.0, 17.5});
    const std::vector<double> amps = cfg.get_list("synth.rush_amplitudes", {900.0, 1000.0});
    const std::vector<double> widths = cfg.get_list("synth.rush_widths", {1.5, 2.0});
    if (centers.size() != amps.size() || centers.size() != widths.size()) {
      throw ConfigError("synth.rush_* lists must have equal lengths");
    }
    app.synth.rush_hours.clear();
    for (std::size_t i = 0; i < centers.size(); ++i) {
      app.synth.rush_hours.push_back({centers[i], amps[i], widths[i]});
    }
  }
  app.synth.weekly_amplitude =
      cfg.get_double("synth.weekly_amplitude", app.synth.weekly_amplitude);
  app.synth.noise_std = cfg.get_double("synth.noise_std", app.synth.noise_std);
  app.synth.event_rate = cfg.get_double("synth.event_rate", app.synth.event_rate);
  app.synth.speed_limit = cfg.get_double("synth.speed_limit", app.synth.speed_limit);
  app.synth.start_epoch = cfg.get_double("synth.start_epoch", app.synth.start_epoch);
  app.synth.sensor_id = cfg.get_string("synth.sensor_id", app.synth.sensor_id);

  app.features.lags = static_cast<std::size_t>(cfg.get_int("features.lags", 12));
  app.features.include_density = cfg.get_bool("features.include_density", true);
  app.features.include_time = cfg.get_bool("features.include_time", true);
  app.features.include_weather = cfg.get_bool("features.include_weather", true);
  app.features.include_event = cfg.get_bool("features.include_event", true);

  app.profile.free_flow_density =
      cfg.get_double("profile.free_flow_density", app.profile.free_flow_density);
  app.profile.congested_density =
      cfg.get_double("profile.congested_density", app.profile.congested_density);
  app.thresholds.low = cfg.get_double("thresholds.low", app.thresholds.low);
  app.thresholds.high = cfg.get_double("thresholds.high", app.thresholds.high);

  {
    std::vector<double> units = cfg.get_list("network.hidden_units", {16.0});
    std::vector<double> dims = cfg.get_list("network.hidden_dims", units);
    if (dims.size() != units.size()) {
      throw ConfigError("network.hidden_dims must match network.hidden_units in length");
    }
    app.hidden_units.clear();
    app.hidden_dims.clear();
    for (double u : units) app.hidden_units.push_back(static_cast<std::size_t>(u));
    for (double d : dims) app.hidden_dims.push_back(static_cast<std::size_t>(d));
  }
  app.sigma = cfg.get_double("network.sigma", app.sigma);
  app.center_strategy = cfg.get_string("network.centers", app.center_strategy);
  if (app.center_strategy != "sample_from_data" && app.center_strategy != "random_uniform") {
    throw ConfigError("network.centers must be sample_from_data or random_uniform");
  }

  app.training.learning_rate = cfg.get_double("train.learning_rate", 0.01);
  app.training.num_epochs = static_cast<std::size_t>(cfg.get_int("train.epochs", 100));
  app.training.loss_kind = loss_kind_from_string(
      cfg.get_string("train.loss", app.task == Task::Regression ? "mse" : "cross_entropy"));
  const std::string batch = cfg.get_string("train.batch_mode", "full_batch");
  if (batch == "full_batch") {
    app.training.batch_mode = BatchMode::FullBatch;
  } else if (batch == "per_sample") {
    app.training.batch_mode = BatchMode::PerSample;
  } else {
    throw ConfigError("train.batch_mode must be full_batch or per_sample");
  }
  const ConvergenceCriterion convergence{
      cfg.get_double("train.min_delta", 1e-9),
      static_cast<std::size_t>(cfg.get_int("train.patience", 10))};
  if (cfg.get_bool("train.early_stop", false)) app.training.convergence = convergence;
  app.training.seed = app.seed;

  app.ga.population_size = static_cast<std::size_t>(cfg.get_int("ga.population_size", 100));
  app.ga.mutation_rate = cfg.get_double("ga.mutation_rate", 0.1);
  app.ga.num_generations = static_cast<std::size_t>(cfg.get_int("ga.generations", 100));
  app.ga.crossover = crossover_kind_from_string(cfg.get_string("ga.crossover", "one_point"));
  app.ga.mutation_sigma = cfg.get_double("ga.mutation_sigma", 0.25);
  app.ga.elitism = static_cast<std::size_t>(cfg.get_int("ga.elitism", 1));
  app.ga.tournament_size = static_cast<std::size_t>(cfg.get_int("ga.tournament_size", 3));
  app.ga.evolve_geometry = cfg.get_bool("ga.evolve_geometry", false);
  app.ga.seed = app.seed;

  const std::string action = cfg.get_string("clean.outlier_action", "drop");
  if (action == "drop") {
    app.clean_policy.outlier_action = OutlierAction::Drop;
  } else if (action == "winsorize") {
    app.clean_policy.outlier_action = OutlierAction::Winsorize;
  } else {
    throw ConfigError("clean.outlier_action must be drop or winsorize");
  }
  app.clean_policy.mad_threshold = cfg.get_double("clean.mad_threshold", 5.0);

  app.train_ratio = cfg.get_double("split.train_ratio", 0.8);
  const std::string mode = cfg.get_string("split.mode", "chronological");
  if (mode == "chronological") {
    app.split_mode = SplitMode::Chronological;
  } else if (mode == "seeded_shuffle") {
    app.split_mode = SplitMode::SeededShuffle;
  } else {
    throw ConfigError("split.mode must be chronological or seeded_shuffle");
  }

  const auto unknown = cfg.unread_keys();
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return app;
}

inline AppConfig load_app_config_file(const std::string& path,
                                      std::optional<std::uint64_t> seed_override = {}) {
  return load_app_config(ConfigMap::parse_file(path), seed_override);
}

/// Output dimension and activation implied by the task unless the network
/// spec overrides them: scalar linear regression, 3-class softmax bands.
inline NetworkSpec make_network_spec(const AppConfig& app, std::size_t input_dim) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_unit_counts = app.hidden_units;
  spec.hidden_output_dims = app.hidden_dims;
  spec.default_width = app.sigma;
  if (app.task == Task::Regression) {
    spec.output_dim = 1;
    spec.output_activation = Activation::Linear;
  } else {
    spec.output_dim = 3;
    spec.output_activation = Activation::Softmax;
  }
  return spec;
}

/// Flow range of a training split; the scale behind normalized flow features
/// and regression targets.
inline void fit_flow_scale(const std::vector<TrafficObservation>& observations,
                           FeatureSpec& features) {
  if (observations.empty()) throw ValueError("fit_flow_scale: no observations");
  double lo = observations.front().flow;
  double hi = lo;
  for (const auto& o : observations) {
    lo = std::min(lo, o.flow);
    hi = std::max(hi, o.flow);
  }
  if (hi == lo) hi = lo + 1.0;  // degenerate flow range guard
  features.flow_scale_lo = lo;
  features.flow_scale_hi = hi;
}

/// Sliding-window supervised sets. Each window of lags+1 observations
/// predicts the next interval: the normalized flow for regression, the
/// one-hot congestion band of the next observation's density for
/// classification.
inline SampleSet build_supervised_samples(const std::vector<TrafficObservation>& obs,
                                          const FeatureSpec& features, Task task,
                                          const DensityProfile& profile,
                                          const CongestionThresholds& thresholds,
                                          std::vector<double>* target_times = nullptr) {
  const std::size_t window = features.window_length();
  SampleSet samples;
  if (obs.size() < window + 1) return samples;
  samples.reserve(obs.size() - window);
  for (std::size_t end = window - 1; end + 1 < obs.size(); ++end) {
    const std::span<const TrafficObservation> w(obs.data() + (end + 1 - window), window);
    Sample s;
    s.features = build_features(w, features);
    const TrafficObservation& next = obs[end + 1];
    if (task == Task::Regression) {
      s.target = {normalize_flow(next.flow, features)};
    } else {
      double density;
      if (next.density) {
        density = *next.density;
      } else if (next.speed > 0.0) {
        density = next.flow / next.speed;
      } else {
        continue;  // label not derivable; skip the window
      }
      const CongestionLevel level = classify_congestion(tdr(density, profile), thresholds);
      s.target.assign(3, 0.0);
      s.target[static_cast<std::size_t>(level.band)] = 1.0;
    }
    samples.push_back(std::move(s));
    if (target_times != nullptr) target_times->push_back(next.timestamp);
  }
  return samples;
}

/// Min-max normalization of feature vectors, fit on train only.
inline void normalize_features(SampleSet& train, SampleSet& test, NormStats& stats) {
  std::vector<Vector> rows;
  rows.reserve(train.size());
  for (const Sample& s : train) rows.push_back(s.features);
  NormStats fitted = fit_norm_stats(rows);
  fitted.flow_lo = stats.flow_lo;
  fitted.flow_hi = stats.flow_hi;
  stats = fitted;
  for (Sample& s : train) s.features = apply_norm(s.features, stats);
  for (Sample& s : test) s.features = apply_norm(s.features, stats);
}

inline double constant_mean_prediction(const SampleSet& train) {
  if (train.empty()) throw ValueError("constant_mean_prediction: empty set");
  double acc = 0.0;
  for (const Sample& s : train) {
    if (s.target.size() != 1) throw DimensionError("constant_mean_prediction: scalar targets only");
    acc += s.target[0];
  }
  return acc / static_cast<double>(train.size());
}

/// Run manifest: what produced which artifacts under which effective config.
/// Commands that take no config file record "none" for hash and seed.
inline void write_manifest(const std::string& path, const std::string& command,
                           const AppConfig* app, const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
  Json j;
  j["command"] = command;
  j["version"] = kVersion;
  if (app != nullptr) {
    j["config_hash"] = app->config_hash;
    j["seed"] = app->seed;
  } else {
    j["config_hash"] = "none";
    j["seed"] = "none";
  }
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  atomic_write(path, j.dump(2) + "\n");
}

inline void write_manifest(const std::string& path, const std::string& command,
                           const AppConfig& app, const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
  write_manifest(path, command, &app, inputs, outputs);
}

}  // namespace rbflow
