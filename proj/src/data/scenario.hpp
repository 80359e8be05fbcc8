#pragma once

#include <cstdint>
#include <vector>

#include "data/dataset.hpp"
#include "models/model.hpp"

namespace deepsad::data {

// One cell of the experimental grid: which class is normal, how much of the
// training set is labeled (gamma_l), how polluted the unlabeled set is
// (gamma_p), and how many anomaly classes supply the labeled anomalies (k_l).
struct ScenarioConfig {
  int normal_class = 0;
  double gamma_l = 0.0;   // m / (n+m)
  double gamma_p = 0.0;   // anomalous fraction of the unlabeled set
  int k_l = 1;
  std::vector<int> anomaly_classes;  // explicit choice; empty = seeded draw
  uint64_t seed = 1;
};

struct ScenarioResult {
  models::SemiSupervisedSplit split;
  Matrix test_x;
  std::vector<int> test_y;  // +1 normal class, -1 otherwise
  std::vector<int> chosen_anomaly_classes;
  size_t pollution_count = 0;
};

// Builds the semi-supervised training split from a class-labeled train
// partition and evaluates ground truth on the given test partition.
//   n        = all normal-class training rows, with floor(gamma_p * n) of
//              them replaced by anomalies drawn uniformly from all anomaly
//              classes
//   m        = round(gamma_l * n / (1 - gamma_l)) labeled anomalies (y=-1)
//              from the k_l chosen classes
// Labeled anomalies are drawn before pollution, so the labeled set is
// invariant across a gamma_p sweep at fixed seed.
ScenarioResult make_scenario(const Dataset& train, const Dataset& test,
                             const ScenarioConfig& cfg);

// Stratified 60:40 train/test split plus the benchmark's semi-supervised
// setting: unlabeled = train normals only (gamma_p = 0), m labeled anomalies
// drawn from the train anomalies, remaining train anomalies discarded.
// Row index lists refer to the returned train dataset so callers can fit a
// scaler on the train partition before materializing the split.
struct OddsSplit {
  Dataset train;
  Dataset test;
  std::vector<size_t> unlabeled_rows;
  std::vector<size_t> labeled_rows;

  models::SemiSupervisedSplit semi(const Matrix& scaled_train_features) const;
};

OddsSplit odds_split(const Dataset& ds, uint64_t seed, double gamma_l = 0.01);

}  // namespace deepsad::data
