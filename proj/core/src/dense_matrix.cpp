/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/dense_matrix.cpp
 */
#include "minisage/dense_matrix.hpp"

#include <stdexcept>

#include "minisage/binfile.hpp"

namespace minisage {

void write_matrix_file(const std::string& path, const DenseMatrix& m) {
  BinFileWriter w(path, "MDT1");
  w.put_u64(m.rows);
  w.put_u64(m.cols);
  w.put_raw(m.data.data(), m.data.size() * sizeof(float));
}

DenseMatrix read_matrix_file(const std::string& path) {
  BinFileReader r(path, "MDT1");
  DenseMatrix m;
  m.rows = r.get_u64();
  m.cols = r.get_u64();
  m.data.resize(m.rows * m.cols);
  r.get_raw(m.data.data(), m.data.size() * sizeof(float));
  return m;
}

}  // namespace minisage
