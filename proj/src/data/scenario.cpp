#include "data/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/rng.hpp"

namespace deepsad::data {

namespace {

size_t labeled_count(double gamma_l, size_t n) {
  // gamma_l = m/(n+m)  =>  m = gamma_l * n / (1 - gamma_l), rounded
  return static_cast<size_t>(
      std::llround(gamma_l * static_cast<double>(n) / (1.0 - gamma_l)));
}

}  // namespace

ScenarioResult make_scenario(const Dataset& train, const Dataset& test,
                             const ScenarioConfig& cfg) {
  train.validate();
  test.validate();
  require(train.class_labels.has_value() && test.class_labels.has_value(),
          ErrorCode::InvalidArgument,
          "make_scenario: class labels required on train and test sets");
  require(cfg.gamma_l >= 0.0 && cfg.gamma_l < 1.0, ErrorCode::InvalidArgument,
          "make_scenario: gamma_l must lie in [0,1)");
  require(cfg.gamma_p >= 0.0 && cfg.gamma_p < 1.0, ErrorCode::InvalidArgument,
          "make_scenario: gamma_p must lie in [0,1)");
  require(cfg.k_l >= 0, ErrorCode::InvalidArgument,
          "make_scenario: k_l must be non-negative");

  const auto& classes = *train.class_labels;
  std::vector<size_t> normal_rows;
  std::vector<size_t> anomaly_rows;
  std::set<int> anomaly_class_set;
  for (size_t i = 0; i < train.rows(); ++i) {
    if (classes[i] == cfg.normal_class) {
      normal_rows.push_back(i);
    } else {
      anomaly_rows.push_back(i);
      anomaly_class_set.insert(classes[i]);
    }
  }
  require(!normal_rows.empty(), ErrorCode::InvalidArgument,
          "make_scenario: normal class " + std::to_string(cfg.normal_class) +
              " not present in the training set");

  Rng rng(mix_seed(cfg.seed, 0));
  ScenarioResult result;

  // anomaly classes supplying the labeled anomalies
  std::vector<int> available(anomaly_class_set.begin(), anomaly_class_set.end());
  if (!cfg.anomaly_classes.empty()) {
    for (int c : cfg.anomaly_classes)
      require(anomaly_class_set.count(c), ErrorCode::InvalidArgument,
              "make_scenario: anomaly class " + std::to_string(c) +
                  " not present in the training set");
    result.chosen_anomaly_classes = cfg.anomaly_classes;
  } else {
    require(static_cast<size_t>(cfg.k_l) <= available.size(),
            ErrorCode::Infeasible,
            "make_scenario: k_l=" + std::to_string(cfg.k_l) + " but only " +
                std::to_string(available.size()) + " anomaly classes exist");
    for (size_t idx : rng.sample_without_replacement(available.size(),
                                                     static_cast<size_t>(cfg.k_l)))
      result.chosen_anomaly_classes.push_back(available[idx]);
    std::sort(result.chosen_anomaly_classes.begin(),
              result.chosen_anomaly_classes.end());
  }

  const size_t n = normal_rows.size();
  const size_t m = labeled_count(cfg.gamma_l, n);

  // labeled anomalies from the chosen classes
  std::vector<size_t> labeled_pool;
  {
    std::set<int> chosen(result.chosen_anomaly_classes.begin(),
                         result.chosen_anomaly_classes.end());
    for (size_t r : anomaly_rows)
      if (chosen.count(classes[r])) labeled_pool.push_back(r);
  }
  require(m <= labeled_pool.size(), ErrorCode::Infeasible,
          "make_scenario: need " + std::to_string(m) +
              " labeled anomalies but the chosen classes hold only " +
              std::to_string(labeled_pool.size()) + " rows");
  std::vector<size_t> labeled_rows;
  for (size_t idx : rng.sample_without_replacement(labeled_pool.size(), m))
    labeled_rows.push_back(labeled_pool[idx]);

  // pollution: replace floor(gamma_p * n) unlabeled slots with anomalies
  // drawn uniformly from the full anomaly pool (minus labeled rows)
  const auto pollution =
      static_cast<size_t>(std::floor(cfg.gamma_p * static_cast<double>(n)));
  std::vector<size_t> unlabeled_rows = normal_rows;
  if (pollution > 0) {
    std::set<size_t> used(labeled_rows.begin(), labeled_rows.end());
    std::vector<size_t> pollution_pool;
    for (size_t r : anomaly_rows)
      if (!used.count(r)) pollution_pool.push_back(r);
    require(pollution <= pollution_pool.size(), ErrorCode::Infeasible,
            "make_scenario: need " + std::to_string(pollution) +
                " pollution anomalies but only " +
                std::to_string(pollution_pool.size()) + " remain");
    std::vector<size_t> slots =
        rng.sample_without_replacement(n, pollution);
    std::vector<size_t> drawn =
        rng.sample_without_replacement(pollution_pool.size(), pollution);
    for (size_t i = 0; i < pollution; ++i)
      unlabeled_rows[slots[i]] = pollution_pool[drawn[i]];
  }
  result.pollution_count = pollution;

  result.split.unlabeled = train.features.take_rows(unlabeled_rows);
  result.split.labeled = train.features.take_rows(labeled_rows);
  result.split.labeled_y.assign(labeled_rows.size(), -1);

  result.test_x = test.features;
  result.test_y.resize(test.rows());
  for (size_t i = 0; i < test.rows(); ++i)
    result.test_y[i] = (*test.class_labels)[i] == cfg.normal_class ? 1 : -1;
  return result;
}

models::SemiSupervisedSplit OddsSplit::semi(
    const Matrix& scaled_train_features) const {
  require(scaled_train_features.rows() == train.rows(), ErrorCode::Shape,
          "odds split: scaled features row count mismatch");
  models::SemiSupervisedSplit s;
  s.unlabeled = scaled_train_features.take_rows(unlabeled_rows);
  s.labeled = scaled_train_features.take_rows(labeled_rows);
  s.labeled_y.assign(labeled_rows.size(), -1);
  return s;
}

OddsSplit odds_split(const Dataset& ds, uint64_t seed, double gamma_l) {
  ds.validate();
  require(ds.anomaly_labels.has_value(), ErrorCode::InvalidArgument,
          "odds_split: anomaly labels required");
  require(gamma_l >= 0.0 && gamma_l < 1.0, ErrorCode::InvalidArgument,
          "odds_split: gamma_l must lie in [0,1)");

  std::vector<size_t> normals, anomalies;
  for (size_t i = 0; i < ds.rows(); ++i)
    ((*ds.anomaly_labels)[i] == 1 ? normals : anomalies).push_back(i);
  require(!normals.empty() && !anomalies.empty(), ErrorCode::InvalidArgument,
          "odds_split: both label values must be present");

  Rng rng(mix_seed(seed, 0));
  rng.shuffle(normals);
  rng.shuffle(anomalies);

  // stratified 60:40, preserving the anomaly proportion per side
  const auto train_n = static_cast<size_t>(
      std::llround(0.6 * static_cast<double>(normals.size())));
  const auto train_a = static_cast<size_t>(
      std::llround(0.6 * static_cast<double>(anomalies.size())));

  std::vector<size_t> train_rows(normals.begin(), normals.begin() + train_n);
  train_rows.insert(train_rows.end(), anomalies.begin(),
                    anomalies.begin() + train_a);
  std::sort(train_rows.begin(), train_rows.end());
  std::vector<size_t> test_rows(normals.begin() + train_n, normals.end());
  test_rows.insert(test_rows.end(), anomalies.begin() + train_a,
                   anomalies.end());
  std::sort(test_rows.begin(), test_rows.end());

  OddsSplit out;
  out.train = ds.take_rows(train_rows);
  out.test = ds.take_rows(test_rows);

  // indices into out.train
  std::vector<size_t> train_normals, train_anoms;
  for (size_t i = 0; i < out.train.rows(); ++i)
    ((*out.train.anomaly_labels)[i] == 1 ? train_normals : train_anoms)
        .push_back(i);

  const size_t n = train_normals.size();
  const size_t m = labeled_count(gamma_l, n);
  require(m >= 1 || gamma_l == 0.0, ErrorCode::Infeasible,
          "odds_split: labeled ratio yields zero labeled anomalies");
  require(m <= train_anoms.size(), ErrorCode::Infeasible,
          "odds_split: need " + std::to_string(m) +
              " labeled anomalies but the training partition holds only " +
              std::to_string(train_anoms.size()));

  out.unlabeled_rows = train_normals;
  for (size_t idx : rng.sample_without_replacement(train_anoms.size(), m))
    out.labeled_rows.push_back(train_anoms[idx]);
  // remaining training anomalies are discarded: the unlabeled pool is clean
  return out;
}

}  // namespace deepsad::data
