#include "core/matrix.hpp"

namespace deepsad {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == m.cols(), ErrorCode::Shape,
            "from_rows: ragged input");
    for (size_t j = 0; j < m.cols(); ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

Matrix Matrix::take_rows(const std::vector<size_t>& idx) const {
  Matrix out(idx.size(), cols_);
  for (size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] < rows_, ErrorCode::InvalidArgument,
            "take_rows: index out of range");
    const double* src = row(idx[i]);
    double* dst = out.row(i);
    for (size_t j = 0; j < cols_; ++j) dst[j] = src[j];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorCode::Shape,
          "matmul: inner dimensions disagree");
  Matrix c(a.rows(), b.cols());
  const size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b.row(p);
      for (size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorCode::Shape,
          "matmul_bt: inner dimensions disagree");
  Matrix c(a.rows(), b.rows());
  const size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (size_t j = 0; j < m; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = s;
    }
  }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorCode::Shape,
          "matmul_at: inner dimensions disagree");
  Matrix c(a.cols(), b.cols());
  const size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (size_t p = 0; p < n; ++p) {
    const double* ap = a.row(p);
    const double* bp = b.row(p);
    for (size_t i = 0; i < k; ++i) {
      const double api = ap[i];
      double* ci = c.row(i);
      for (size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
    }
  }
  return c;
}

}  // namespace deepsad
