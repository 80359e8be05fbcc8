#pragma once

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace deepsad::baselines {

// Isolation tree stored as a flat node array; feature < 0 marks a leaf.
struct IsoTree {
  struct Node {
    int32_t feature = -1;
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    uint32_t size = 0;  // rows that reached this node (leaf path-length credit)
  };
  std::vector<Node> nodes;
};

struct IsolationForest {
  std::vector<IsoTree> trees;
  uint32_t subsample = 256;
  uint32_t input_dim = 0;
};

// Expected unsuccessful-search path length c(n) = 2 H(n-1) - 2(n-1)/n with
// exact harmonic numbers for n <= 512 (c(1) = 0, c(2) = 1) and the
// Euler-Mascheroni approximation above.
double average_path_length(size_t n);

// t trees on subsamples of psi rows drawn without replacement (all rows when
// fewer); per-tree height limit ceil(log2 psi). Split features and values
// are uniform; constant features are retried over the remaining features
// before giving up on a node.
IsolationForest iforest_fit(const Matrix& data, int trees, int psi,
                            uint64_t seed);

// 2^(-E[h(x)] / c(psi)); always in (0,1]
std::vector<double> iforest_score(const IsolationForest& forest,
                                  const Matrix& x);

double iforest_path_length(const IsoTree& tree, const double* x);

}  // namespace deepsad::baselines
