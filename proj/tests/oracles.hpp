// Test-only oracles, independent of the library implementation paths they
// check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "core/matrix.hpp"

namespace oracles {

// plain ijk dot-product matrix multiply
inline deepsad::Matrix naive_matmul(const deepsad::Matrix& a,
                                    const deepsad::Matrix& b) {
  deepsad::Matrix c(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

// AUC by O(n^2) pair counting: wins + half ties over anomaly/normal pairs
inline double pair_count_auc(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  double num = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != -1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 1) continue;
      ++pairs;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  }
  return num / static_cast<double>(pairs);
}

// dense scan of the soft-boundary objective over candidates {0} + distances,
// ascending, strict improvement
inline double brute_force_radius(const std::vector<double>& d2, double nu) {
  std::vector<double> candidates = d2;
  candidates.push_back(0.0);
  std::sort(candidates.begin(), candidates.end());
  const double n = static_cast<double>(d2.size());
  double best_r = candidates[0], best_f = 0.0;
  bool first = true;
  for (double r : candidates) {
    double hinge = 0.0;
    for (double v : d2) hinge += std::max(0.0, v - r);
    const double f = r + hinge / (nu * n);
    if (first || f < best_f) {
      best_f = f;
      best_r = r;
      first = false;
    }
  }
  return best_r;
}

// exact two-sided Wilcoxon p by enumerating all 2^n sign assignments over
// the given (tie-averaged) ranks
inline double wilcoxon_enum_p(const std::vector<double>& ranks, double w_min) {
  const size_t n = ranks.size();
  const auto total = uint64_t{1} << n;
  uint64_t count_le = 0;
  for (uint64_t mask = 0; mask < total; ++mask) {
    double w_plus = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (mask & (uint64_t{1} << i)) w_plus += ranks[i];
    if (w_plus <= w_min) ++count_le;
  }
  const double p =
      2.0 * static_cast<double>(count_le) / static_cast<double>(total);
  return std::min(1.0, p);
}

// Spearman rank correlation (average ranks for ties)
inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < v.size()) {
      size_t j = i;
      while (j + 1 < v.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = static_cast<double>(i + j + 2) / 2.0;
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(va * vb);
}

}  // namespace oracles
