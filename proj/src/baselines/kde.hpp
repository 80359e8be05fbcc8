#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace deepsad::baselines {

// Gaussian kernel density estimator; scores are negative log densities so
// that higher means more anomalous.
struct KdeModel {
  Matrix training_points;
  double bandwidth = 1.0;
};

// 2^0.5, 2^1.0, ..., 2^5.0 in half-exponent steps
std::vector<double> default_bandwidth_grid();

// Selects the grid bandwidth maximizing the mean held-out log-likelihood
// over `folds` contiguous blocks of a seeded shuffle; each fold is scored by
// a density fit on the remaining points. Ties resolve to the smaller
// bandwidth.
KdeModel kde_fit(const Matrix& data, std::span<const double> bandwidth_grid,
                 int folds, uint64_t seed);

inline KdeModel kde_fit(const Matrix& data, uint64_t seed) {
  const auto grid = default_bandwidth_grid();
  return kde_fit(data, grid, 5, seed);
}

// log (1/n) sum_i (2 pi h^2)^(-D/2) exp(-||x - x_i||^2 / (2 h^2)),
// evaluated via log-sum-exp
double kde_log_density(const Matrix& points, double bandwidth, const double* x);

std::vector<double> kde_score(const KdeModel& model, const Matrix& x);

}  // namespace deepsad::baselines
