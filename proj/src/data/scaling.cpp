#include "data/scaling.hpp"

#include <cmath>

namespace deepsad::data {

Matrix Scaler::apply(const Matrix& x) const {
  require(x.cols() == offset.size(), ErrorCode::Shape,
          "scaler: feature count mismatch");
  Matrix out(x.rows(), x.cols());
  for (size_t i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i);
    double* oi = out.row(i);
    for (size_t j = 0; j < x.cols(); ++j) {
      const double centered = xi[j] - offset[j];
      oi[j] = scale[j] > 0.0 ? centered / scale[j] : centered;
    }
  }
  return out;
}

Scaler fit_minmax(const Matrix& train) {
  require(!train.empty(), ErrorCode::InvalidArgument, "fit_minmax: empty train set");
  const size_t d = train.cols();
  Scaler s;
  s.kind = Scaler::Kind::MinMax;
  s.offset.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (size_t j = 0; j < d; ++j) {
    double lo = train.at(0, j), hi = lo;
    for (size_t i = 1; i < train.rows(); ++i) {
      const double v = train.at(i, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.offset[j] = lo;
    s.scale[j] = hi - lo;  // 0 for constant features: they map to 0
  }
  return s;
}

Scaler fit_standardize(const Matrix& train) {
  require(!train.empty(), ErrorCode::InvalidArgument,
          "fit_standardize: empty train set");
  const size_t d = train.cols(), n = train.rows();
  Scaler s;
  s.offset.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double* xi = train.row(i);
    for (size_t j = 0; j < d; ++j) s.offset[j] += xi[j];
  }
  for (size_t j = 0; j < d; ++j) s.offset[j] /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const double* xi = train.row(i);
    for (size_t j = 0; j < d; ++j) {
      const double c = xi[j] - s.offset[j];
      s.scale[j] += c * c;
    }
  }
  for (size_t j = 0; j < d; ++j)
    s.scale[j] = std::sqrt(s.scale[j] / static_cast<double>(n));
  return s;
}

}  // namespace deepsad::data
