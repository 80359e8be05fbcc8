#pragma once

#include <span>
#include <vector>

namespace deepsad::eval {

// Area under the ROC curve with the anomaly class (-1) as positive and
// higher scores meaning more anomalous:
//   AUC = P(score_anomaly > score_normal) + 1/2 P(tie),
// computed by rank averaging over tie groups (Mann-Whitney U
// normalization). Throws an undefined-metric error when only one label
// value is present.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double p_two_sided = 1.0;
  size_t n_used = 0;  // pairs remaining after zero differences are dropped
};

// Wilcoxon signed-rank test on paired samples. Zero differences are
// dropped; ties in |d| receive average ranks. The two-sided p-value is
// exact (sign-pattern enumeration via a rank-sum distribution) for n <= 20
// and a tie-corrected normal approximation with continuity correction
// above. Fewer than 5 nonzero differences is an error.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b);

// 1-based ranks with tie groups averaged, in the order of `values`.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace deepsad::eval
