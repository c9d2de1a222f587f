/*
 * Copyright 2026 The ppkmeans Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppkm/random.hpp"
#include "ppkm/ring.hpp"

namespace ppkm {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

inline std::size_t num_elements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

// Dense row-major tensor of ring elements (rank 1 to 4).
class RingTensor {
 public:
  RingTensor() = default;
  explicit RingTensor(Shape shape)
      : shape_(std::move(shape)), data_(num_elements(shape_), 0) {}
  RingTensor(Shape shape, std::vector<RingValue> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != num_elements(shape_)) {
      throw ShapeError("RingTensor: " + std::to_string(data_.size()) +
                       " values for shape " + to_string(shape_));
    }
  }

  static RingTensor random(Shape shape, Rng& rng) {
    RingTensor t(std::move(shape));
    for (auto& v : t.data_) v = rng.next_u64();
    return t;
  }

  static RingTensor filled(Shape shape, RingValue value) {
    RingTensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<RingValue> values() { return data_; }
  std::span<const RingValue> values() const { return data_; }
  std::vector<RingValue>& raw() { return data_; }
  const std::vector<RingValue>& raw() const { return data_; }

  RingValue& operator[](std::size_t i) { return data_[i]; }
  RingValue operator[](std::size_t i) const { return data_[i]; }
  RingValue& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  RingValue at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }

  RingTensor reshaped(Shape shape) const {
    if (num_elements(shape) != size()) {
      throw ShapeError("RingTensor::reshaped: " + to_string(shape_) + " -> " +
                       to_string(shape));
    }
    return RingTensor(std::move(shape), data_);
  }

  RingTensor& operator+=(const RingTensor& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  RingTensor& operator-=(const RingTensor& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  RingTensor& operator*=(RingValue scalar) {
    for (auto& v : data_) v *= scalar;
    return *this;
  }

  friend RingTensor operator+(RingTensor a, const RingTensor& b) { return a += b; }
  friend RingTensor operator-(RingTensor a, const RingTensor& b) { return a -= b; }
  friend RingTensor operator*(RingTensor a, RingValue s) { return a *= s; }
  friend RingTensor operator-(RingTensor a) {
    for (auto& v : a.data_) v = ring_neg(v);
    return a;
  }

  friend bool operator==(const RingTensor&, const RingTensor&) = default;

  void require_same_shape(const RingTensor& o, const char* what) const {
    if (shape_ != o.shape_) {
      throw ShapeError(std::string("RingTensor ") + what + ": shape " +
                       to_string(shape_) + " vs " + to_string(o.shape_));
    }
  }

 private:
  Shape shape_;
  std::vector<RingValue> data_;
};

inline RingTensor hadamard(const RingTensor& a, const RingTensor& b) {
  a.require_same_shape(b, "hadamard");
  RingTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline RingTensor matmul(const RingTensor& a, const RingTensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw ShapeError("matmul: " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
  const std::size_t m = a.rows(), n = a.cols(), q = b.cols();
  RingTensor out({m, q});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      const RingValue ail = a.at(i, l);
      if (ail == 0) continue;
      for (std::size_t j = 0; j < q; ++j) out.at(i, j) += ail * b.at(l, j);
    }
  }
  return out;
}

inline RingTensor transpose(const RingTensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: rank must be 2");
  RingTensor out({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

// Dense row-major matrix of reals (plaintext data, decoded results).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
      throw ShapeError("Matrix: " + std::to_string(data_.size()) +
                       " values for " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Shape shape() const { return {rows_, cols_}; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("max_abs_diff: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

}  // namespace ppkm
