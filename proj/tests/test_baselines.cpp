#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "baselines/hybrid.hpp"
#include "baselines/iforest.hpp"
#include "baselines/kde.hpp"
#include "core/rng.hpp"
#include "eval/metrics.hpp"
#include "oracles.hpp"

using namespace deepsad;
using namespace deepsad::baselines;

namespace {

Matrix gaussian_1d(size_t n, double mean, double sd, Rng& rng) {
  Matrix m(n, 1);
  for (size_t i = 0; i < n; ++i) m.at(i, 0) = mean + sd * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("kde: kernel at zero distance, D=1, h=1") {
  KdeModel model;
  model.training_points = Matrix(1, 1, 0.7);
  model.bandwidth = 1.0;
  Matrix x(1, 1, 0.7);
  const auto s = kde_score(model, x);
  CHECK(s[0] == doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi))
                    .epsilon(1e-12));
}

TEST_CASE("kde: far query stays finite through log-sum-exp") {
  Rng rng(3);
  KdeModel model;
  model.training_points = gaussian_1d(100, 0.0, 1.0, rng);
  model.bandwidth = 1.0;
  Matrix far(1, 1, 1e4);
  const auto s = kde_score(model, far);
  CHECK(std::isfinite(s[0]));
  CHECK(s[0] > 1e6);  // -log density is huge but not inf
}

TEST_CASE("kde density integrates to one (trapezoid oracle)") {
  Rng rng(5);
  KdeModel model;
  model.training_points = gaussian_1d(50, 0.0, 1.0, rng);
  model.bandwidth = 0.8;
  // integrate over [-12, 12]
  const double lo = -12.0, hi = 12.0;
  const size_t steps = 4000;
  const double dx = (hi - lo) / static_cast<double>(steps);
  double integral = 0.0;
  for (size_t i = 0; i <= steps; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double density =
        std::exp(kde_log_density(model.training_points, model.bandwidth, &x));
    integral += density * dx * (i == 0 || i == steps ? 0.5 : 1.0);
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("kde fit: single-value grid is selected as-is") {
  Rng rng(7);
  Matrix data = gaussian_1d(50, 0.0, 1.0, rng);
  const double grid[] = {2.5};
  const auto model = kde_fit(data, grid, 5, 1);
  CHECK(model.bandwidth == 2.5);
}

TEST_CASE("kde fit matches an exhaustive CV log-likelihood oracle") {
  Rng rng(11);
  Matrix data = gaussian_1d(500, 0.0, 1.0, rng);
  const auto grid = default_bandwidth_grid();
  const uint64_t seed = 3;
  const auto model = kde_fit(data, grid, 5, seed);

  // oracle: same folds, naive density loop, argmax over the curve
  Rng fold_rng(mix_seed(seed, 0));
  std::vector<size_t> order(data.rows());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  fold_rng.shuffle(order);
  std::vector<size_t> fold_of(data.rows());
  size_t pos = 0;
  for (int f = 0; f < 5; ++f) {
    size_t len = data.rows() / 5 + (static_cast<size_t>(f) < data.rows() % 5);
    for (size_t i = 0; i < len; ++i) fold_of[order[pos++]] = f;
  }
  double best_ll = -1e300;
  double best_h = 0.0;
  for (double h : grid) {
    double ll = 0.0;
    for (size_t i = 0; i < data.rows(); ++i) {
      double density = 0.0;
      size_t kept = 0;
      for (size_t j = 0; j < data.rows(); ++j) {
        if (fold_of[j] == fold_of[i]) continue;
        ++kept;
        const double d = data.at(i, 0) - data.at(j, 0);
        density += std::exp(-d * d / (2.0 * h * h)) /
                   std::sqrt(2.0 * std::numbers::pi * h * h);
      }
      ll += std::log(density / static_cast<double>(kept));
    }
    if (ll > best_ll) {
      best_ll = ll;
      best_h = h;
    }
  }
  CHECK(model.bandwidth == best_h);
}

TEST_CASE("kde fit: selection is deterministic under the same seed") {
  Rng rng(13);
  Matrix data = gaussian_1d(60, 2.0, 3.0, rng);
  const auto grid = default_bandwidth_grid();
  const auto a = kde_fit(data, grid, 5, 9);
  const auto b = kde_fit(data, grid, 5, 9);
  CHECK(a.bandwidth == b.bandwidth);
}

TEST_CASE("kde fit rejects fewer rows than folds") {
  Matrix data(3, 1, 0.0);
  const auto grid = default_bandwidth_grid();
  CHECK_THROWS_AS(kde_fit(data, grid, 5, 1), Error);
}

TEST_CASE("kde scores are invariant under training-point permutation") {
  Rng rng(17);
  Matrix data = gaussian_1d(40, 0.0, 1.0, rng);
  std::vector<size_t> perm(40);
  for (size_t i = 0; i < 40; ++i) perm[i] = 39 - i;
  KdeModel a{data, 1.3};
  KdeModel b{data.take_rows(perm), 1.3};
  Matrix probe = gaussian_1d(10, 0.5, 2.0, rng);
  const auto sa = kde_score(a, probe);
  const auto sb = kde_score(b, probe);
  for (size_t i = 0; i < sa.size(); ++i)
    CHECK(sa[i] == doctest::Approx(sb[i]).epsilon(1e-12));
}

TEST_CASE("kde: duplicating a training point never raises its score") {
  Rng rng(19);
  Matrix data = gaussian_1d(30, 0.0, 1.0, rng);
  KdeModel base{data, 1.0};
  Matrix probe = data.take_rows({4});
  const double before = kde_score(base, probe)[0];

  std::vector<size_t> idx(31);
  for (size_t i = 0; i < 30; ++i) idx[i] = i;
  idx[30] = 4;
  KdeModel dup{data.take_rows(idx), 1.0};
  const double after = kde_score(dup, probe)[0];
  CHECK(after <= before + 1e-12);
}

TEST_CASE("isolation forest: c(2) equals 1 and the harmonic tail is smooth") {
  CHECK(average_path_length(1) == 0.0);
  CHECK(average_path_length(2) == doctest::Approx(1.0).epsilon(1e-12));
  // exact/approx crossover continuity near n=512
  const double below = average_path_length(512);
  const double above = average_path_length(513);
  CHECK(above > below);
  CHECK(above - below < 0.01);
}

TEST_CASE("isolation forest: score 0.5 at the reference path length") {
  // 2^(-E/c) with E = c gives exactly 0.5
  const double c = average_path_length(256);
  CHECK(std::pow(2.0, -c / c) == doctest::Approx(0.5));
}

TEST_CASE("isolation forest separates an outlier from a tight cluster") {
  Rng rng(23);
  Matrix data(101, 2);
  for (size_t i = 0; i < 100; ++i) {
    data.at(i, 0) = rng.normal() * 0.2;
    data.at(i, 1) = rng.normal() * 0.2;
  }
  data.at(100, 0) = 8.0;
  data.at(100, 1) = -7.5;
  const auto forest = iforest_fit(data, 100, 64, 7);
  const auto scores = iforest_score(forest, data);
  double max_inlier = 0.0;
  for (size_t i = 0; i < 100; ++i) max_inlier = std::max(max_inlier, scores[i]);
  CHECK(scores[100] > max_inlier);
  for (double s : scores) {
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("isolation forest is deterministic under a fixed seed") {
  Rng rng(29);
  Matrix data(200, 3);
  for (double& v : data.values()) v = rng.uniform(-1.0, 1.0);
  const auto f1 = iforest_fit(data, 50, 64, 11);
  const auto f2 = iforest_fit(data, 50, 64, 11);
  Matrix probe(5, 3, 0.3);
  CHECK(iforest_score(f1, probe) == iforest_score(f2, probe));
}

TEST_CASE("isolation forest handles constant features") {
  Matrix data(50, 2);
  for (size_t i = 0; i < 50; ++i) {
    data.at(i, 0) = 1.0;  // constant
    data.at(i, 1) = static_cast<double>(i);
  }
  const auto forest = iforest_fit(data, 10, 32, 3);
  const auto scores = iforest_score(forest, data);
  for (double s : scores) CHECK(std::isfinite(s));
}

TEST_CASE("hybrid with an identity encoder reproduces raw scores") {
  Rng rng(31);
  Matrix train(60, 2);
  for (double& v : train.values()) v = rng.uniform(-1.0, 1.0);
  Matrix test(30, 2);
  for (double& v : test.values()) v = rng.uniform(-2.0, 2.0);

  // hand-built identity encoder (d = D), the exact-identity limit of a
  // trained near-identity autoencoder
  models::Autoencoder ae;
  std::vector<nn::LayerSpec> enc{{nn::LayerKind::Dense, 2, 2, false, 0.1, 0.1}};
  std::vector<nn::LayerSpec> dec{{nn::LayerKind::Dense, 2, 2, false, 0.1, 0.1}};
  ae.net = nn::Network::from_specs(enc);
  ae.net.append(nn::Network::from_specs(dec));
  ae.encoder_layers = 1;
  for (size_t li = 0; li < 2; ++li) {
    auto& d = std::get<nn::DenseLayer>(ae.net.layer(li));
    d.weights.at(0, 0) = 1.0;
    d.weights.at(1, 1) = 1.0;
  }

  ShallowSpec spec;
  spec.use_kde = true;
  spec.seed = 5;
  const auto hybrid_scores = hybrid_apply(ae, spec, train, test);
  const auto raw =
      kde_score(kde_fit(train, spec.bandwidth_grid, spec.folds, spec.seed), test);
  CHECK(oracles::spearman(hybrid_scores, raw) > 0.95);
}

TEST_CASE("hybrid pipeline runs with an untrained zero-epoch autoencoder") {
  Rng rng(37);
  Matrix train(40, 3);
  for (double& v : train.values()) v = rng.uniform(0.0, 1.0);
  Matrix test(10, 3);
  for (double& v : test.values()) v = rng.uniform(0.0, 1.0);

  models::Autoencoder ae = models::make_autoencoder(3, {4, 2}, true, 0.1,
                                                    false, /*seed=*/41);
  ShallowSpec spec;
  spec.use_kde = false;
  spec.trees = 20;
  spec.psi = 16;
  spec.seed = 43;
  const auto scores = hybrid_apply(ae, spec, train, test);
  CHECK(scores.size() == 10);
  for (double s : scores) CHECK(std::isfinite(s));
}

TEST_CASE("hybrid kde achieves high AUC on a two-cluster toy") {
  Rng rng(41);
  Matrix train(100, 2);
  for (size_t i = 0; i < 100; ++i) {
    train.at(i, 0) = rng.normal() * 0.5;
    train.at(i, 1) = rng.normal() * 0.5;
  }
  Matrix test(60, 2);
  std::vector<int> labels(60);
  for (size_t i = 0; i < 60; ++i) {
    const bool anomaly = i >= 40;
    test.at(i, 0) = (anomaly ? 5.0 : 0.0) + rng.normal() * 0.5;
    test.at(i, 1) = (anomaly ? 5.0 : 0.0) + rng.normal() * 0.5;
    labels[i] = anomaly ? -1 : 1;
  }
  models::Autoencoder ae = models::make_autoencoder(2, {8, 2}, true, 0.1,
                                                    false, /*seed=*/47);
  ShallowSpec spec;
  spec.use_kde = true;
  spec.seed = 53;
  const auto scores = hybrid_apply(ae, spec, train, test);
  CHECK(eval::auc_roc(scores, labels) > 0.9);
}
