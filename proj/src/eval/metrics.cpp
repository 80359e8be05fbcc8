#include "eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace deepsad::eval {

std::vector<double> average_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i+1 .. j+1 (1-based); average is exact in binary (halves)
    const double avg = static_cast<double>(i + 1 + j + 1) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), ErrorCode::Shape,
          "auc_roc: scores and labels must align");
  require(!scores.empty(), ErrorCode::InvalidArgument, "auc_roc: empty input");
  size_t n_anom = 0, n_norm = 0;
  for (int y : labels) {
    require(y == 1 || y == -1, ErrorCode::InvalidArgument,
            "auc_roc: labels must be +1 or -1");
    (y == -1 ? n_anom : n_norm) += 1;
  }
  require(n_anom > 0 && n_norm > 0, ErrorCode::Metric,
          "auc_roc: undefined metric, both label values required");

  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == -1) rank_sum += ranks[i];
  const double m = static_cast<double>(n_anom);
  const double u = rank_sum - m * (m + 1.0) / 2.0;
  return u / (m * static_cast<double>(n_norm));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::Shape,
          "wilcoxon: paired samples must align");
  std::vector<double> diff;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diff.push_back(d);
  }
  const size_t n = diff.size();
  require(n >= 5, ErrorCode::Metric,
          "wilcoxon: fewer than 5 nonzero differences (" + std::to_string(n) +
              ")");

  std::vector<double> abs_d(n);
  for (size_t i = 0; i < n; ++i) abs_d[i] = std::abs(diff[i]);
  const auto ranks = average_ranks(abs_d);

  double w_plus = 0.0, total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    total += ranks[i];
    if (diff[i] > 0.0) w_plus += ranks[i];
  }
  const double w_minus = total - w_plus;
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult out;
  out.statistic = w;
  out.n_used = n;

  if (n <= 20) {
    // doubled ranks are integers even under ties; count sign assignments by
    // convolving (1 + x^r) over the ranks
    std::vector<long> r2(n);
    long max_sum = 0;
    for (size_t i = 0; i < n; ++i) {
      r2[i] = std::lround(2.0 * ranks[i]);
      max_sum += r2[i];
    }
    std::vector<uint64_t> count(static_cast<size_t>(max_sum) + 1, 0);
    count[0] = 1;
    long reach = 0;
    for (size_t i = 0; i < n; ++i) {
      reach += r2[i];
      for (long s = reach; s >= r2[i]; --s)
        count[static_cast<size_t>(s)] +=
            count[static_cast<size_t>(s - r2[i])];
    }
    const long w2 = std::lround(2.0 * w);
    uint64_t at_most = 0;
    for (long s = 0; s <= w2; ++s) at_most += count[static_cast<size_t>(s)];
    const double p =
        2.0 * static_cast<double>(at_most) /
        static_cast<double>(uint64_t{1} << n);
    out.p_two_sided = std::min(1.0, p);
    return out;
  }

  // normal approximation with tie correction and continuity correction
  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<double> sorted(abs_d);
    std::sort(sorted.begin(), sorted.end());
    size_t i = 0;
    while (i < sorted.size()) {
      size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  const double var =
      nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  require(var > 0.0, ErrorCode::Metric, "wilcoxon: degenerate variance");
  const double z = (w - mu + 0.5) / std::sqrt(var);
  const double phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
  out.p_two_sided = std::min(1.0, 2.0 * phi);
  return out;
}

}  // namespace deepsad::eval
