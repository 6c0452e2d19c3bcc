/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/dense_matrix.hpp
 * @brief Row-major float32 matrix plus the `MDT1` binary matrix file format.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace minisage {

struct DenseMatrix {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> data;  // rows * cols, row-major

  DenseMatrix() = default;
  DenseMatrix(std::uint64_t r, std::uint64_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  float* row(std::uint64_t i) { return data.data() + i * cols; }
  const float* row(std::uint64_t i) const { return data.data() + i * cols; }
  std::span<float> row_span(std::uint64_t i) { return {row(i), cols}; }
  std::span<const float> row_span(std::uint64_t i) const { return {row(i), cols}; }

  float& at(std::uint64_t i, std::uint64_t j) { return data[i * cols + j]; }
  float at(std::uint64_t i, std::uint64_t j) const { return data[i * cols + j]; }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Binary matrix file: magic "MDT1", rows u64, cols u64, then raw row-major
// float32 data. All fields little-endian.
void write_matrix_file(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix_file(const std::string& path);

}  // namespace minisage
