// Exercises the shared-library C API surface end to end.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "deepsad.h"

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
    std::remove(path.c_str());
  }
  ~TempPath() { std::remove(path.c_str()); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// two separable blobs with semi labels
struct Toy {
  std::vector<double> features;
  std::vector<int32_t> semi;
  int64_t rows = 0;
};

Toy make_toy() {
  Toy t;
  std::mt19937_64 gen(99);
  std::normal_distribution<double> noise(0.0, 0.4);
  for (int i = 0; i < 80; ++i) {
    t.features.push_back(noise(gen));
    t.features.push_back(noise(gen));
    t.semi.push_back(0);
  }
  for (int i = 0; i < 10; ++i) {
    t.features.push_back(3.5 + noise(gen));
    t.features.push_back(3.5 + noise(gen));
    t.semi.push_back(-1);
  }
  t.rows = 90;
  return t;
}

ds_train_config quick_cfg(uint64_t seed) {
  ds_train_config cfg;
  ds_train_config_defaults(&cfg);
  cfg.search_epochs = 5;
  cfg.finetune_epochs = 5;
  cfg.batch_size = 32;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("version and defaults") {
  CHECK(std::string(ds_version()).size() > 0);
  ds_train_config cfg;
  ds_train_config_defaults(&cfg);
  CHECK(cfg.search_epochs == 50);
  CHECK(cfg.search_lr == 1e-4);
  CHECK(cfg.finetune_epochs == 100);
  CHECK(cfg.finetune_lr == 1e-5);
  CHECK(cfg.batch_size == 200);
}

TEST_CASE("dataset create, csv round trip, labels") {
  const double features[] = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const int32_t labels[] = {1, -1, 1};
  ds_dataset* ds = nullptr;
  REQUIRE(ds_dataset_create(features, 3, 2, labels, nullptr, &ds) == DS_OK);
  CHECK(ds_dataset_rows(ds) == 3);
  CHECK(ds_dataset_cols(ds) == 2);
  CHECK(ds_dataset_has_anomaly_labels(ds) == 1);

  TempPath csv("capi_roundtrip.csv");
  REQUIRE(ds_dataset_save_csv(ds, csv.path.c_str()) == DS_OK);
  ds_dataset* back = nullptr;
  REQUIRE(ds_dataset_load_csv(csv.path.c_str(), &back) == DS_OK);
  CHECK(ds_dataset_rows(back) == 3);
  std::vector<double> out(6);
  REQUIRE(ds_dataset_features(back, out.data()) == DS_OK);
  for (int i = 0; i < 6; ++i) CHECK(out[i] == features[i]);
  std::vector<int32_t> lab(3);
  REQUIRE(ds_dataset_anomaly_labels(back, lab.data()) == DS_OK);
  CHECK(lab[1] == -1);
  ds_dataset_free(back);
  ds_dataset_free(ds);
}

TEST_CASE("missing file reports DS_ERR_IO with the path in the message") {
  ds_dataset* ds = nullptr;
  CHECK(ds_dataset_load_csv("/no/such/file.csv", &ds) == DS_ERR_IO);
  CHECK(std::string(ds_last_error()).find("/no/such/file.csv") !=
        std::string::npos);
}

TEST_CASE("scaling fits on train only") {
  const double tf[] = {0.0, 5.0, 10.0};
  const double of[] = {20.0};
  ds_dataset* train = nullptr;
  ds_dataset* other = nullptr;
  REQUIRE(ds_dataset_create(tf, 3, 1, nullptr, nullptr, &train) == DS_OK);
  REQUIRE(ds_dataset_create(of, 1, 1, nullptr, nullptr, &other) == DS_OK);
  ds_dataset* others[] = {other};
  REQUIRE(ds_scale_fit_apply(DS_SCALE_MINMAX, train, others, 1) == DS_OK);
  double tv[3], ov[1];
  ds_dataset_features(train, tv);
  ds_dataset_features(other, ov);
  CHECK(tv[0] == 0.0);
  CHECK(tv[1] == 0.5);
  CHECK(tv[2] == 1.0);
  CHECK(ov[0] == 2.0);  // beyond the train range, not clamped
  ds_dataset_free(train);
  ds_dataset_free(other);
}

TEST_CASE("train, score, save, load across the C boundary") {
  Toy toy = make_toy();
  ds_dataset* data = nullptr;
  REQUIRE(ds_dataset_create(toy.features.data(), toy.rows, 2, nullptr, nullptr,
                            &data) == DS_OK);

  const ds_train_config cfg = quick_cfg(7);
  ds_model* model = nullptr;
  REQUIRE(ds_train(data, toy.semi.data(), "deep-sad,eta=1", "8-4-2", &cfg,
                   nullptr, &model) == DS_OK);
  CHECK(std::string(ds_model_kind(model)) == "deep-sad");
  CHECK(ds_model_input_dim(model) == 2);
  CHECK(std::string(ds_model_meta(model, "eta")) == "1");

  int64_t n_epochs = 0;
  REQUIRE(ds_model_epoch_losses(model, nullptr, &n_epochs) == DS_OK);
  CHECK(n_epochs == 10);
  std::vector<double> losses(static_cast<size_t>(n_epochs));
  REQUIRE(ds_model_epoch_losses(model, losses.data(), &n_epochs) == DS_OK);
  for (double l : losses) CHECK(std::isfinite(l));

  std::vector<double> scores(static_cast<size_t>(toy.rows));
  REQUIRE(ds_model_score(model, data, scores.data()) == DS_OK);

  TempPath mf("capi_model.bin");
  REQUIRE(ds_model_save(model, mf.path.c_str()) == DS_OK);
  ds_model* loaded = nullptr;
  REQUIRE(ds_model_load(mf.path.c_str(), &loaded) == DS_OK);
  CHECK(std::string(ds_model_kind(loaded)) == "deep-sad");
  CHECK(std::string(ds_model_meta(loaded, "eta")) == "1");
  std::vector<double> scores2(static_cast<size_t>(toy.rows));
  REQUIRE(ds_model_score(loaded, data, scores2.data()) == DS_OK);
  CHECK(scores == scores2);  // bit-exact round trip

  ds_model_free(loaded);
  ds_model_free(model);
  ds_dataset_free(data);
}

TEST_CASE("pretrained autoencoder feeds training and encodes") {
  Toy toy = make_toy();
  ds_dataset* data = nullptr;
  REQUIRE(ds_dataset_create(toy.features.data(), toy.rows, 2, nullptr, nullptr,
                            &data) == DS_OK);
  const ds_train_config cfg = quick_cfg(11);
  ds_model* ae = nullptr;
  REQUIRE(ds_pretrain_autoencoder(data, "8-4-2", &cfg, &ae) == DS_OK);
  CHECK(std::string(ds_model_kind(ae)) == "autoencoder");
  CHECK(ds_model_rep_dim(ae) == 2);
  std::vector<double> codes(static_cast<size_t>(toy.rows) * 2);
  REQUIRE(ds_model_encode(ae, data, codes.data()) == DS_OK);

  ds_model* model = nullptr;
  REQUIRE(ds_train(data, toy.semi.data(), "one-class", "8-4-2", &cfg, ae,
                   &model) == DS_OK);
  CHECK(std::string(ds_model_kind(model)) == "one-class");

  // architecture mismatch is a usage error
  ds_model* bad = nullptr;
  CHECK(ds_train(data, toy.semi.data(), "one-class", "6-2", &cfg, ae, &bad) ==
        DS_ERR_INVALID_ARGUMENT);

  ds_model_free(model);
  ds_model_free(ae);
  ds_dataset_free(data);
}

TEST_CASE("shallow methods and hybrids via method specs") {
  Toy toy = make_toy();
  ds_dataset* data = nullptr;
  REQUIRE(ds_dataset_create(toy.features.data(), toy.rows, 2, nullptr, nullptr,
                            &data) == DS_OK);
  const ds_train_config cfg = quick_cfg(13);

  for (const char* spec : {"kde", "iforest,trees=20,psi=32"}) {
    ds_model* model = nullptr;
    REQUIRE(ds_train(data, toy.semi.data(), spec, "8-4-2", &cfg, nullptr,
                     &model) == DS_OK);
    std::vector<double> scores(static_cast<size_t>(toy.rows));
    REQUIRE(ds_model_score(model, data, scores.data()) == DS_OK);
    TempPath mf(std::string("capi_shallow_") + ds_model_kind(model) + ".bin");
    REQUIRE(ds_model_save(model, mf.path.c_str()) == DS_OK);
    ds_model* loaded = nullptr;
    REQUIRE(ds_model_load(mf.path.c_str(), &loaded) == DS_OK);
    std::vector<double> scores2(static_cast<size_t>(toy.rows));
    REQUIRE(ds_model_score(loaded, data, scores2.data()) == DS_OK);
    CHECK(scores == scores2);
    ds_model_free(loaded);
    ds_model_free(model);
  }

  ds_model* ae = nullptr;
  REQUIRE(ds_pretrain_autoencoder(data, "8-4-2", &cfg, &ae) == DS_OK);
  ds_model* hybrid = nullptr;
  REQUIRE(ds_train(data, toy.semi.data(), "hybrid-kde", "8-4-2", &cfg, ae,
                   &hybrid) == DS_OK);
  CHECK(std::string(ds_model_kind(hybrid)) == "hybrid-kde");
  std::vector<double> scores(static_cast<size_t>(toy.rows));
  REQUIRE(ds_model_score(hybrid, data, scores.data()) == DS_OK);
  ds_model_free(hybrid);
  ds_model_free(ae);
  ds_dataset_free(data);
}

TEST_CASE("scoring with mismatched dimensionality is a shape error") {
  Toy toy = make_toy();
  ds_dataset* data = nullptr;
  REQUIRE(ds_dataset_create(toy.features.data(), toy.rows, 2, nullptr, nullptr,
                            &data) == DS_OK);
  const ds_train_config cfg = quick_cfg(17);
  ds_model* model = nullptr;
  REQUIRE(ds_train(data, nullptr, "one-class", "4-2", &cfg, nullptr, &model) ==
          DS_OK);

  const double wide[] = {0.0, 1.0, 2.0};
  ds_dataset* bad = nullptr;
  REQUIRE(ds_dataset_create(wide, 1, 3, nullptr, nullptr, &bad) == DS_OK);
  double score = 0.0;
  CHECK(ds_model_score(model, bad, &score) == DS_ERR_SHAPE);
  ds_dataset_free(bad);
  ds_model_free(model);
  ds_dataset_free(data);
}

TEST_CASE("metrics across the C boundary") {
  const double scores[] = {0.9, 0.8, 0.3, 0.1};
  const int32_t labels[] = {-1, -1, 1, 1};
  double auc = 0.0;
  REQUIRE(ds_auc_roc(scores, labels, 4, &auc) == DS_OK);
  CHECK(auc == 1.0);

  const double a[] = {1.0, 2.0, 3.0, 4.0, 5.0};
  const double b[] = {0.0, 0.0, 0.0, 0.0, 0.0};
  double w = -1.0, p = -1.0;
  REQUIRE(ds_wilcoxon_signed_rank(a, b, 5, &w, &p) == DS_OK);
  CHECK(w == 0.0);
  CHECK(p == doctest::Approx(0.0625));

  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> latents(2000);
  for (auto& v : latents) v = normal(gen);
  double nats = 0.0;
  int degenerate = -1;
  REQUIRE(ds_latent_entropy(latents.data(), 1000, 2, 1, &nats, &degenerate) ==
          DS_OK);
  CHECK(degenerate == 0);
  CHECK(nats == doctest::Approx(1.0 + std::log(2.0 * 3.14159265358979))
                    .epsilon(0.1));
}

TEST_CASE("demo toy writes deterministic files") {
  TempPath g1("capi_toy_grid1.csv"), g2("capi_toy_grid2.csv");
  REQUIRE(ds_demo_toy(3, g1.path.c_str(), nullptr) == DS_OK);
  REQUIRE(ds_demo_toy(3, g2.path.c_str(), nullptr) == DS_OK);
  const std::string c1 = read_file(g1.path);
  const std::string c2 = read_file(g2.path);
  CHECK(c1 == c2);
  const std::string header = "x,y,score_deepsad,score_supervised\n";
  CHECK(c1.substr(0, header.size()) == header);
}

TEST_CASE("scenario grid runs from a file and resumes without duplicates") {
  // tiny class-labeled dataset written as CSV
  TempPath train_csv("capi_grid_train.csv"), test_csv("capi_grid_test.csv");
  {
    std::ofstream tr(train_csv.path), te(test_csv.path);
    tr << "x,y,class\n";
    te << "x,y,class\n";
    std::mt19937_64 gen(21);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 30; ++i)
        tr << c + noise(gen) << ',' << -c + noise(gen) << ',' << c << "\n";
      for (int i = 0; i < 10; ++i)
        te << c + noise(gen) << ',' << -c + noise(gen) << ',' << c << "\n";
    }
  }
  TempPath grid("capi_grid.cfg"), records("capi_grid_records.txt");
  {
    std::ofstream g(grid.path);
    g << "[data]\n"
      << "train = " << train_csv.path << "\n"
      << "test = " << test_csv.path << "\n"
      << "dataset = capi-toy\nscaling = minmax\n"
      << "[train]\narch = 8-4-2\nsearch_epochs = 2\nfinetune_epochs = 2\n"
      << "batch_size = 16\nkde_folds = 3\n"
      << "[grid]\nmethod = deep-sad kde\nnormal_class = 0 1\n"
      << "gamma_l = 0.05\ngamma_p = 0.0\nk_l = 1\nseed = 1 2\n";
  }
  int64_t written = 0;
  REQUIRE(ds_run_scenario_grid(grid.path.c_str(), records.path.c_str(), 1,
                               &written) == DS_OK);
  CHECK(written == 8);  // 2 methods x 2 classes x 2 seeds

  // resume: nothing new to write
  REQUIRE(ds_run_scenario_grid(grid.path.c_str(), records.path.c_str(), 1,
                               &written) == DS_OK);
  CHECK(written == 0);

  char* table = nullptr;
  REQUIRE(ds_report(records.path.c_str(), "method,gamma_l", &table) == DS_OK);
  const std::string t(table);
  ds_string_free(table);
  CHECK(t.find("deep-sad") != std::string::npos);
  CHECK(t.find("kde") != std::string::npos);
}
