#include "baselines/iforest.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace deepsad::baselines {

double average_path_length(size_t n) {
  if (n <= 1) return 0.0;
  static const std::vector<double> harmonic = [] {
    std::vector<double> h(513, 0.0);
    for (size_t i = 1; i <= 512; ++i)
      h[i] = h[i - 1] + 1.0 / static_cast<double>(i);
    return h;
  }();
  const double nn = static_cast<double>(n);
  double h_nm1;
  if (n - 1 <= 512) {
    h_nm1 = harmonic[n - 1];
  } else {
    constexpr double euler_mascheroni = 0.57721566490153286;
    h_nm1 = std::log(nn - 1.0) + euler_mascheroni + 1.0 / (2.0 * (nn - 1.0));
  }
  return 2.0 * h_nm1 - 2.0 * (nn - 1.0) / nn;
}

namespace {

struct TreeBuilder {
  const Matrix& data;
  Rng& rng;
  size_t height_limit;
  IsoTree tree;

  int32_t build(std::vector<size_t>& rows, size_t depth) {
    const auto node_id = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].size = static_cast<uint32_t>(rows.size());
    if (rows.size() <= 1 || depth >= height_limit) return node_id;

    const size_t d = data.cols();
    // random feature order; skip constant features
    std::vector<size_t> feats(d);
    for (size_t j = 0; j < d; ++j) feats[j] = j;
    rng.shuffle(feats);
    for (size_t fi = 0; fi < d; ++fi) {
      const size_t f = feats[fi];
      double lo = data.at(rows[0], f), hi = lo;
      for (size_t r : rows) {
        const double v = data.at(r, f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      const double split = rng.uniform(lo, hi);
      std::vector<size_t> left, right;
      for (size_t r : rows)
        (data.at(r, f) < split ? left : right).push_back(r);
      if (left.empty() || right.empty()) continue;
      rows.clear();
      rows.shrink_to_fit();
      const int32_t li = build(left, depth + 1);
      const int32_t ri = build(right, depth + 1);
      tree.nodes[node_id].feature = static_cast<int32_t>(f);
      tree.nodes[node_id].threshold = split;
      tree.nodes[node_id].left = li;
      tree.nodes[node_id].right = ri;
      return node_id;
    }
    return node_id;  // all features constant: leaf
  }
};

}  // namespace

IsolationForest iforest_fit(const Matrix& data, int trees, int psi,
                            uint64_t seed) {
  require(!data.empty(), ErrorCode::InvalidArgument, "iforest_fit: empty data");
  require(trees >= 1, ErrorCode::InvalidArgument,
          "iforest_fit: need at least one tree");
  require(psi >= 2, ErrorCode::InvalidArgument, "iforest_fit: psi must be >= 2");

  const size_t n = data.rows();
  const size_t sub = std::min<size_t>(static_cast<size_t>(psi), n);
  const size_t height_limit =
      static_cast<size_t>(std::ceil(std::log2(static_cast<double>(sub))));

  IsolationForest forest;
  forest.subsample = static_cast<uint32_t>(sub);
  forest.input_dim = static_cast<uint32_t>(data.cols());
  forest.trees.reserve(static_cast<size_t>(trees));
  for (int t = 0; t < trees; ++t) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(t)));
    std::vector<size_t> rows = rng.sample_without_replacement(n, sub);
    TreeBuilder builder{data, rng, height_limit, {}};
    builder.build(rows, 0);
    forest.trees.push_back(std::move(builder.tree));
  }
  return forest;
}

double iforest_path_length(const IsoTree& tree, const double* x) {
  size_t depth = 0;
  int32_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& nd = tree.nodes[node];
    node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    ++depth;
  }
  return static_cast<double>(depth) +
         average_path_length(tree.nodes[node].size);
}

std::vector<double> iforest_score(const IsolationForest& forest,
                                  const Matrix& x) {
  require(!forest.trees.empty(), ErrorCode::InvalidArgument,
          "iforest_score: empty forest");
  require(x.cols() == forest.input_dim, ErrorCode::Shape,
          "iforest_score: dimension mismatch");
  const double norm = average_path_length(forest.subsample);
  std::vector<double> scores(x.rows());
  for (size_t i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (const auto& tree : forest.trees)
      sum += iforest_path_length(tree, x.row(i));
    const double mean_path = sum / static_cast<double>(forest.trees.size());
    scores[i] = norm > 0.0 ? std::pow(2.0, -mean_path / norm) : 1.0;
  }
  return scores;
}

}  // namespace deepsad::baselines
