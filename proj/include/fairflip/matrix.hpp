#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "fairflip/error.hpp"

namespace fairflip {

/// Dense row-major matrix of doubles. The only linear algebra this project
/// needs is matvec products and small Cholesky solves, so this stays minimal.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != m.cols_) raise(ErrorKind::InvalidArgument, "ragged matrix literal");
      std::size_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot_row(const Matrix& m, std::size_t i, const std::vector<double>& v) {
  const double* r = m.row_ptr(i);
  double s = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * v[j];
  return s;
}

}  // namespace fairflip
