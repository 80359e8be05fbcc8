#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace deepsad {

// Dense row-major matrix of doubles. All training math runs at 64-bit
// precision; gradient verification depends on it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& at(size_t r, size_t c) { return v_[r * cols_ + c]; }
  double at(size_t r, size_t c) const { return v_[r * cols_ + c]; }
  double* row(size_t r) { return v_.data() + r * cols_; }
  const double* row(size_t r) const { return v_.data() + r * cols_; }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  void fill(double x) { v_.assign(v_.size(), x); }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  double frobenius_sq() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return s;
  }

  Matrix take_rows(const std::vector<size_t>& idx) const;

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T  (rows of A dotted with rows of B)
Matrix matmul_bt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at(const Matrix& a, const Matrix& b);

inline void check_same_shape(const Matrix& a, const Matrix& b,
                             const std::string& what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::Shape,
          what + ": shape mismatch");
}

}  // namespace deepsad
