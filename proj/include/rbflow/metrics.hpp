#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbflow/error.hpp"
#include "rbflow/linalg.hpp"

namespace rbflow {

inline double mae(const Vector& predicted, const Vector& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DimensionError("mae: sequences differ in length or are empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    acc += std::fabs(predicted[i] - actual[i]);
  }
  return acc / static_cast<double>(predicted.size());
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Confusion-matrix metrics. With positive_class set, one-vs-rest binary
/// counts; otherwise macro-averaged over all labels present in either
/// sequence. Precision and recall fall back to 0 when their denominator is
/// 0, and f1 = 2PR/(P+R) with the same convention.
inline ClassificationMetrics classification_metrics(const std::vector<int>& predicted,
                                                    const std::vector<int>& actual,
                                                    std::optional<int> positive_class = {}) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DimensionError("classification_metrics: label sequences differ in length or are empty");
  }
  ClassificationMetrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == actual[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());

  std::set<int> classes;
  if (positive_class) {
    classes.insert(*positive_class);
  } else {
    classes.insert(predicted.begin(), predicted.end());
    classes.insert(actual.begin(), actual.end());
  }

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (int cls : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const bool pred_pos = predicted[i] == cls;
      const bool true_pos = actual[i] == cls;
      if (pred_pos && true_pos) ++tp;
      if (pred_pos && !true_pos) ++fp;
      if (!pred_pos && true_pos) ++fn;
    }
    precision_sum += tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    recall_sum += tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  }
  m.precision = precision_sum / static_cast<double>(classes.size());
  m.recall = recall_sum / static_cast<double>(classes.size());
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

}  // namespace rbflow
