#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rbflow/error.hpp"
#include "rbflow/linalg.hpp"

namespace rbflow {

/// Per-feature min/max recorded from the training split only, plus the flow
/// range used when building feature vectors and targets. Degenerate marks
/// constant columns, which map to 0.
struct NormStats {
  Vector feature_min;
  Vector feature_max;
  std::vector<std::uint8_t> degenerate;
  double flow_lo = 0.0;
  double flow_hi = 1.0;

  std::size_t dimension() const { return feature_min.size(); }

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline NormStats fit_norm_stats(const std::vector<Vector>& rows) {
  if (rows.empty()) throw ValueError("fit_norm_stats: empty feature matrix");
  const std::size_t dim = rows.front().size();
  NormStats stats;
  stats.feature_min.assign(dim, 0.0);
  stats.feature_max.assign(dim, 0.0);
  for (std::size_t c = 0; c < dim; ++c) {
    stats.feature_min[c] = rows.front()[c];
    stats.feature_max[c] = rows.front()[c];
  }
  for (const Vector& row : rows) {
    if (row.size() != dim) throw DimensionError("fit_norm_stats: ragged feature matrix");
    for (std::size_t c = 0; c < dim; ++c) {
      stats.feature_min[c] = std::min(stats.feature_min[c], row[c]);
      stats.feature_max[c] = std::max(stats.feature_max[c], row[c]);
    }
  }
  stats.degenerate.resize(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    stats.degenerate[c] = stats.feature_max[c] == stats.feature_min[c] ? 1 : 0;
  }
  return stats;
}

inline Vector apply_norm(const Vector& row, const NormStats& stats) {
  if (row.size() != stats.dimension()) {
    throw DimensionError("apply_norm: row dim " + std::to_string(row.size()) +
                         " != stats dim " + std::to_string(stats.dimension()));
  }
  Vector out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    out[c] = stats.degenerate[c] ? 0.0
                                 : (row[c] - stats.feature_min[c]) /
                                       (stats.feature_max[c] - stats.feature_min[c]);
  }
  return out;
}

inline Vector invert_norm(const Vector& row, const NormStats& stats) {
  if (row.size() != stats.dimension()) {
    throw DimensionError("invert_norm: row dim " + std::to_string(row.size()) +
                         " != stats dim " + std::to_string(stats.dimension()));
  }
  Vector out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    out[c] = stats.degenerate[c]
                 ? stats.feature_min[c]
                 : row[c] * (stats.feature_max[c] - stats.feature_min[c]) + stats.feature_min[c];
  }
  return out;
}

/// Min-max to [0, 1] per feature, fit on the given rows. Constant features
/// map to 0 and are flagged. Use apply_norm with these stats for held-out
/// rows so test data never leaks into the fit.
inline std::pair<std::vector<Vector>, NormStats> normalize(const std::vector<Vector>& rows) {
  NormStats stats = fit_norm_stats(rows);
  std::vector<Vector> out;
  out.reserve(rows.size());
  for (const Vector& row : rows) out.push_back(apply_norm(row, stats));
  return {std::move(out), std::move(stats)};
}

inline std::vector<Vector> denormalize(const std::vector<Vector>& rows, const NormStats& stats) {
  std::vector<Vector> out;
  out.reserve(rows.size());
  for (const Vector& row : rows) out.push_back(invert_norm(row, stats));
  return out;
}

}  // namespace rbflow
