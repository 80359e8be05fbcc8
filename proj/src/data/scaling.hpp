#pragma once

#include "data/dataset.hpp"

namespace deepsad::data {

// Per-feature affine transform fit on a training set only; applying it to
// other sets never reads their statistics.
struct Scaler {
  enum class Kind { MinMax, Standardize };
  Kind kind = Kind::Standardize;
  std::vector<double> offset;  // min or mean
  std::vector<double> scale;   // max-min or population sigma (0 = constant feature)

  Matrix apply(const Matrix& x) const;
  void apply_in_place(Dataset& ds) const { ds.features = apply(ds.features); }
};

// Maps train features into [0,1]; constant features map to 0. Transformed
// test values may fall outside [0,1] (not clamped).
Scaler fit_minmax(const Matrix& train);

// (x - mean) / sigma with population sigma; constant features pass through
// centered.
Scaler fit_standardize(const Matrix& train);

}  // namespace deepsad::data
