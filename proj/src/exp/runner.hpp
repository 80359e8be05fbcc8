#pragma once

#include <functional>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "data/scenario.hpp"
#include "eval/records.hpp"
#include "models/model.hpp"
#include "models/model_file.hpp"

namespace deepsad::exp {

using LogFn = std::function<void(const std::string&)>;

// Method-level knobs shared by the runners and the CLI.
struct MethodParams {
  models::Hyper hp;
  bool pretrain = true;
  int if_trees = 100;
  int if_psi = 256;
  int kde_folds = 5;
  std::vector<double> kde_grid;  // empty = default grid
};

std::vector<nn::LayerSpec> build_arch(size_t input_dim, const std::string& arch,
                                      bool batchnorm, double leakiness);

// Trains `method` on the split. Deep methods initialize from `pretrained`
// when given, else pretrain an autoencoder on their own training rows when
// params.pretrain is set; the supervised classifier always starts from
// Glorot weights. Unsupervised methods see only the unlabeled rows.
models::AnyModel fit_method(const std::string& method,
                            const MethodParams& params,
                            const models::SemiSupervisedSplit& split,
                            const std::vector<nn::LayerSpec>& arch,
                            const models::TrainingConfig& tcfg,
                            const models::Autoencoder* pretrained = nullptr);

// fit_method + test scores (higher = more anomalous)
std::vector<double> fit_and_score(const std::string& method,
                                  const MethodParams& params,
                                  const models::SemiSupervisedSplit& split,
                                  const Matrix& test_x,
                                  const std::vector<nn::LayerSpec>& arch,
                                  const models::TrainingConfig& tcfg);

// One grid cell: (method, scenario parameters, seed) plus the sweepable
// method hyperparameters.
struct ScenarioCell {
  std::string method;
  std::string arch;
  int normal_class = 0;
  double gamma_l = 0.0;
  double gamma_p = 0.0;
  int k_l = 1;
  double eta = 1.0;
  double nu = 0.1;
  uint64_t seed = 1;
};

struct GridRun {
  std::string dataset_name;
  data::Dataset train;  // scaled
  data::Dataset test;   // scaled with train statistics
  models::TrainingConfig base_cfg;
  MethodParams params;
  bool batchnorm = true;
  double leakiness = 0.1;
  std::vector<ScenarioCell> cells;
};

GridRun load_grid(const std::string& grid_path);

// Executes every cell not already present in the records file (resume by
// cell key); infeasible cells are recorded as skip comments and the run
// continues. Records are flushed in deterministic cell order even with
// multiple workers. Returns the number of newly written records.
size_t run_scenario_grid(const std::string& grid_path,
                         const std::string& records_path, int workers,
                         const LogFn& log = {});

struct OddsBenchSpec {
  std::string dataset_name;
  data::Dataset dataset;
  std::vector<std::string> methods;
  std::string arch;
  std::vector<uint64_t> seeds;
  models::TrainingConfig base_cfg;
  MethodParams params;
  bool batchnorm = true;
  double leakiness = 0.1;
  double gamma_l = 0.01;
  int workers = 1;
};

// Per (method, seed): stratified 60:40 split, standardize on the train
// partition, train, score, record AUC. Returns the mean +/- std summary per
// method plus pairwise Wilcoxon tests across seeds.
std::string run_odds_benchmark(const OddsBenchSpec& spec,
                               const std::string& records_path,
                               const LogFn& log = {});

// Figure-style 2D toy: trains Deep SAD and the supervised classifier on a
// normal blob with a labeled anomaly cluster, then writes dense grid scores
// for external plotting. Optional latents file holds the Deep SAD embedding
// of the labeled points.
void demo_toy(uint64_t seed, const std::string& grid_csv_path,
              const std::string& latents_csv_path = "",
              const LogFn& log = {});

std::string report(const std::string& records_path,
                   const std::vector<std::string>& group_by);

}  // namespace deepsad::exp
