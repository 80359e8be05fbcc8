#include "baselines/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/rng.hpp"

namespace deepsad::baselines {

std::vector<double> default_bandwidth_grid() {
  std::vector<double> grid;
  for (double e = 0.5; e <= 5.0 + 1e-9; e += 0.5) grid.push_back(std::pow(2.0, e));
  return grid;
}

namespace {

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double kde_log_density(const Matrix& points, double bandwidth, const double* x) {
  const size_t n = points.rows(), d = points.cols();
  const double h2 = bandwidth * bandwidth;
  std::vector<double> exps(n);
  for (size_t i = 0; i < n; ++i) {
    const double* pi = points.row(i);
    double d2 = 0.0;
    for (size_t j = 0; j < d; ++j) {
      const double c = x[j] - pi[j];
      d2 += c * c;
    }
    exps[i] = -d2 / (2.0 * h2);
  }
  const double log_norm =
      -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * h2) -
      std::log(static_cast<double>(n));
  return log_norm + log_sum_exp(exps);
}

KdeModel kde_fit(const Matrix& data, std::span<const double> bandwidth_grid,
                 int folds, uint64_t seed) {
  require(!data.empty(), ErrorCode::InvalidArgument, "kde_fit: empty data");
  require(!bandwidth_grid.empty(), ErrorCode::InvalidArgument,
          "kde_fit: empty bandwidth grid");
  for (double h : bandwidth_grid)
    require(h > 0.0, ErrorCode::InvalidArgument,
            "kde_fit: bandwidths must be positive");
  require(folds >= 2, ErrorCode::InvalidArgument, "kde_fit: need >= 2 folds");
  require(data.rows() >= static_cast<size_t>(folds), ErrorCode::InvalidArgument,
          "kde_fit: fewer rows (" + std::to_string(data.rows()) +
              ") than folds (" + std::to_string(folds) + ")");

  const size_t n = data.rows(), d = data.cols();
  Rng rng(mix_seed(seed, 0));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  // contiguous blocks of the shuffled order; first n%folds blocks get one
  // extra row
  std::vector<size_t> fold_of(n);
  {
    size_t pos = 0;
    for (int f = 0; f < folds; ++f) {
      size_t len = n / static_cast<size_t>(folds) +
                   (static_cast<size_t>(f) < n % static_cast<size_t>(folds) ? 1 : 0);
      for (size_t i = 0; i < len; ++i) fold_of[order[pos++]] = f;
    }
  }

  // total held-out log-likelihood per bandwidth; distances are reused across
  // the grid within each fold
  std::vector<double> total_ll(bandwidth_grid.size(), 0.0);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (int f = 0; f < folds; ++f) {
    std::vector<size_t> held, kept;
    for (size_t i = 0; i < n; ++i)
      (fold_of[i] == static_cast<size_t>(f) ? held : kept).push_back(i);
    if (held.empty()) continue;
    std::vector<double> d2(kept.size());
    std::vector<double> exps(kept.size());
    for (size_t hi = 0; hi < held.size(); ++hi) {
      const double* x = data.row(held[hi]);
      for (size_t ki = 0; ki < kept.size(); ++ki) {
        const double* p = data.row(kept[ki]);
        double s = 0.0;
        for (size_t j = 0; j < d; ++j) {
          const double c = x[j] - p[j];
          s += c * c;
        }
        d2[ki] = s;
      }
      for (size_t gi = 0; gi < bandwidth_grid.size(); ++gi) {
        const double h2 = bandwidth_grid[gi] * bandwidth_grid[gi];
        for (size_t ki = 0; ki < kept.size(); ++ki)
          exps[ki] = -d2[ki] / (2.0 * h2);
        const double log_norm =
            -0.5 * static_cast<double>(d) * (log_2pi + std::log(h2)) -
            std::log(static_cast<double>(kept.size()));
        total_ll[gi] += log_norm + log_sum_exp(exps);
      }
    }
  }

  size_t best = 0;
  for (size_t gi = 1; gi < bandwidth_grid.size(); ++gi)
    if (total_ll[gi] > total_ll[best]) best = gi;

  KdeModel model;
  model.training_points = data;
  model.bandwidth = bandwidth_grid[best];
  return model;
}

std::vector<double> kde_score(const KdeModel& model, const Matrix& x) {
  require(x.cols() == model.training_points.cols(), ErrorCode::Shape,
          "kde_score: dimension mismatch");
  std::vector<double> scores(x.rows());
  for (size_t i = 0; i < x.rows(); ++i)
    scores[i] =
        -kde_log_density(model.training_points, model.bandwidth, x.row(i));
  return scores;
}

}  // namespace deepsad::baselines
