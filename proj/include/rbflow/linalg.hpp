#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rbflow/error.hpp"

namespace rbflow {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Sized for desk-scale networks; no view
/// machinery, just indexed storage with exact (==) comparability.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(m.cols()) +
                         " columns but vector has " + std::to_string(v.size()) + " elements");
  }
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

/// w^T * v for one matrix column sweep: returns m^T * v (length = cols).
inline Vector matvec_transposed(const Matrix& m, const Vector& v) {
  if (m.rows() != v.size()) {
    throw DimensionError("matvec_transposed: matrix has " + std::to_string(m.rows()) +
                         " rows but vector has " + std::to_string(v.size()) + " elements");
  }
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += m(r, c) * v[r];
  }
  return out;
}

inline double squared_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("squared_distance: vectors have sizes " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace rbflow
