#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbflow/dataset.hpp"
#include "rbflow/metrics.hpp"
#include "rbflow/model_io.hpp"
#include "rbflow/training.hpp"

namespace rbflow {

enum class Task { Regression, CongestionClassification };

inline const char* to_string(Task t) {
  return t == Task::Regression ? "regression" : "congestion_classification";
}

inline Task task_from_string(const std::string& s) {
  if (s == "regression") return Task::Regression;
  if (s == "congestion_classification") return Task::CongestionClassification;
  throw ParseError("unknown task: " + s);
}

/// Task-tagged metrics plus the provenance needed to reproduce them.
struct EvaluationReport {
  Task task = Task::Regression;
  std::optional<double> mae_flow = {};  // veh/h, regression only
  std::optional<ClassificationMetrics> classification = {};
  std::optional<double> baseline_mae_flow = {};  // constant-mean yardstick
  std::size_t sample_count = 0;
  std::string model_id;
  Provenance dataset_provenance;
  std::uint64_t seed = 0;
  std::string config_hash;
};

namespace detail {

inline int argmax_label(const Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace detail

/// Runs the model over the test set. Regression reports MAE on denormalized
/// flow; classification takes argmax labels and reports the confusion-matrix
/// metrics. The optional baseline_prediction (a constant, in normalized
/// units) is pushed through the same path to produce the yardstick MAE.
inline EvaluationReport evaluate(const RbfNetwork& net, const SampleSet& test_set, Task task,
                                 const NormStats& stats,
                                 std::optional<double> baseline_prediction = {}) {
  if (test_set.empty()) throw ValueError("evaluate: empty test set");
  EvaluationReport report;
  report.task = task;
  report.sample_count = test_set.size();

  if (task == Task::Regression) {
    const double scale = stats.flow_hi - stats.flow_lo;
    if (!(scale > 0.0)) throw ValueError("evaluate: flow scale must have hi > lo");
    Vector predicted;
    Vector actual;
    predicted.reserve(test_set.size());
    actual.reserve(test_set.size());
    for (const Sample& s : test_set) {
      if (s.target.size() != 1) throw DimensionError("evaluate: regression target must be scalar");
      const ForwardTrace trace = network_forward(s.features, net);
      predicted.push_back(trace.output[0] * scale + stats.flow_lo);
      actual.push_back(s.target[0] * scale + stats.flow_lo);
    }
    report.mae_flow = mae(predicted, actual);
    if (baseline_prediction) {
      const Vector constant(actual.size(), *baseline_prediction * scale + stats.flow_lo);
      report.baseline_mae_flow = mae(constant, actual);
    }
  } else {
    std::vector<int> predicted;
    std::vector<int> actual;
    predicted.reserve(test_set.size());
    actual.reserve(test_set.size());
    for (const Sample& s : test_set) {
      const ForwardTrace trace = network_forward(s.features, net);
      if (trace.output.size() != s.target.size()) {
        throw DimensionError("evaluate: output and target dims differ");
      }
      predicted.push_back(detail::argmax_label(trace.output));
      actual.push_back(detail::argmax_label(s.target));
    }
    report.classification = classification_metrics(predicted, actual);
  }
  return report;
}

inline std::string report_to_markdown(const EvaluationReport& r) {
  std::string md = "# Evaluation report\n\n";
  md += std::string("- task: ") + to_string(r.task) + "\n";
  md += "- samples: " + std::to_string(r.sample_count) + "\n";
  char buf[96];
  if (r.mae_flow) {
    std::snprintf(buf, sizeof(buf), "- MAE: %.3f veh/h\n", *r.mae_flow);
    md += buf;
  }
  if (r.baseline_mae_flow) {
    std::snprintf(buf, sizeof(buf), "- constant-mean baseline MAE: %.3f veh/h\n",
                  *r.baseline_mae_flow);
    md += buf;
  }
  if (r.classification) {
    std::snprintf(buf, sizeof(buf), "- accuracy: %.4f\n- precision: %.4f\n- recall: %.4f\n- f1: %.4f\n",
                  r.classification->accuracy, r.classification->precision,
                  r.classification->recall, r.classification->f1);
    md += buf;
  }
  md += "- model: " + r.model_id + "\n";
  md += "- dataset: " + r.dataset_provenance.kind + " (" + r.dataset_provenance.detail + ")\n";
  md += "- seed: " + std::to_string(r.seed) + "\n";
  md += "- config: " + r.config_hash + "\n";
  return md;
}

inline Json report_to_json(const EvaluationReport& r) {
  Json j;
  j["task"] = to_string(r.task);
  j["sample_count"] = r.sample_count;
  if (r.mae_flow) j["mae_veh_h"] = *r.mae_flow;
  if (r.baseline_mae_flow) j["baseline_mae_veh_h"] = *r.baseline_mae_flow;
  if (r.classification) {
    j["accuracy"] = r.classification->accuracy;
    j["precision"] = r.classification->precision;
    j["recall"] = r.classification->recall;
    j["f1"] = r.classification->f1;
  }
  j["model_id"] = r.model_id;
  j["dataset"] = {{"kind", r.dataset_provenance.kind},
                  {"detail", r.dataset_provenance.detail},
                  {"seed", r.dataset_provenance.seed}};
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  return j;
}

}  // namespace rbflow
