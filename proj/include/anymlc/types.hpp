#ifndef ANYMLC_TYPES_HPP_
#define ANYMLC_TYPES_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "anymlc/errors.hpp"

namespace anymlc {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  std::span<double> row(std::size_t i) {
    return {values.data() + i * cols, cols};
  }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }

  bool empty() const { return values.empty(); }

  bool all_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Dense row-major matrix of 0/1 entries.
struct BinaryMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> values;

  BinaryMatrix() = default;
  BinaryMatrix(std::size_t r, std::size_t c, std::uint8_t fill = 0)
      : rows(r), cols(c), values(r * c, fill) {}

  std::uint8_t& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  std::uint8_t at(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }

  std::span<std::uint8_t> row(std::size_t i) {
    return {values.data() + i * cols, cols};
  }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;
};

// Per-instance raw scores, one column per class. All entries finite.
struct LogitBatch {
  Matrix values;

  static LogitBatch from(Matrix m) {
    if (m.rows == 0 || m.cols == 0) {
      throw InvalidInputError("logit batch must be non-empty");
    }
    if (!m.all_finite()) {
      throw InvalidInputError("logit batch contains non-finite values");
    }
    return LogitBatch{std::move(m)};
  }

  std::size_t instances() const { return values.rows; }
  std::size_t classes() const { return values.cols; }
};

// Per-instance binary labels, shape-matched to a LogitBatch.
struct TargetBatch {
  BinaryMatrix values;

  static TargetBatch from(BinaryMatrix m) {
    if (m.rows == 0 || m.cols == 0) {
      throw InvalidInputError("target batch must be non-empty");
    }
    for (std::uint8_t v : m.values) {
      if (v > 1) throw InvalidInputError("target entries must be 0 or 1");
    }
    return TargetBatch{std::move(m)};
  }

  std::size_t instances() const { return values.rows; }
  std::size_t classes() const { return values.cols; }

  bool row_positive(std::size_t i) const {
    for (std::uint8_t v : values.row(i)) {
      if (v != 0) return true;
    }
    return false;
  }
};

inline void require_same_shape(const LogitBatch& logits, const TargetBatch& targets) {
  if (logits.values.rows != targets.values.rows ||
      logits.values.cols != targets.values.cols) {
    throw InvalidInputError("logit and target batch shapes differ");
  }
}

}  // namespace anymlc

#endif  // ANYMLC_TYPES_HPP_
