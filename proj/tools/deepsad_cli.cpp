// Command-line front end; everything goes through the shared-library C API.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deepsad.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(ds_status st) {
  switch (st) {
    case DS_OK:
      return 0;
    case DS_ERR_INVALID_ARGUMENT:
    case DS_ERR_SHAPE:
    case DS_ERR_IO:
    case DS_ERR_FORMAT:
    case DS_ERR_INFEASIBLE:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

[[noreturn]] void die(ds_status st, const std::string& context) {
  std::cerr << "error: " << context << ": " << ds_last_error() << "\n";
  std::exit(exit_code_for(st));
}

void check(ds_status st, const std::string& context) {
  if (st != DS_OK) die(st, context);
}

struct LogSink {
  std::ofstream loss_file;
  bool verbose = false;
};

void log_callback(const char* line, void* user) {
  auto* sink = static_cast<LogSink*>(user);
  if (std::strncmp(line, "epoch ", 6) == 0) {
    if (sink->loss_file.is_open())
      sink->loss_file << line << '\n' << std::flush;
    else if (sink->verbose)
      std::cerr << line << '\n';
  } else if (sink->verbose) {
    std::cerr << line << '\n';
  }
}

using DatasetPtr = std::unique_ptr<ds_dataset, decltype(&ds_dataset_free)>;
using ModelPtr = std::unique_ptr<ds_model, decltype(&ds_model_free)>;

DatasetPtr load_dataset(const std::string& path) {
  ds_dataset* ds = nullptr;
  check(ds_dataset_load_csv(path.c_str(), &ds), "loading " + path);
  return {ds, &ds_dataset_free};
}

ModelPtr load_model(const std::string& path) {
  ds_model* m = nullptr;
  check(ds_model_load(path.c_str(), &m), "loading model " + path);
  return {m, &ds_model_free};
}

// merge an unlabeled set and an optional labeled set (label column +1/-1)
// into one dataset plus per-row semi labels {0, +1, -1}
struct TrainData {
  DatasetPtr merged{nullptr, &ds_dataset_free};
  std::vector<int32_t> semi;
};

TrainData assemble_train_data(const std::string& data_path,
                              const std::string& labeled_path) {
  TrainData out;
  DatasetPtr unlabeled = load_dataset(data_path);
  const int64_t n = ds_dataset_rows(unlabeled.get());
  const int64_t d = ds_dataset_cols(unlabeled.get());
  if (labeled_path.empty()) {
    out.merged = std::move(unlabeled);
    out.semi.assign(static_cast<size_t>(n), 0);
    return out;
  }
  DatasetPtr labeled = load_dataset(labeled_path);
  if (!ds_dataset_has_anomaly_labels(labeled.get())) {
    std::cerr << "error: " << labeled_path << " needs a `label` column\n";
    std::exit(kExitUsage);
  }
  const int64_t m = ds_dataset_rows(labeled.get());
  if (ds_dataset_cols(labeled.get()) != d) {
    std::cerr << "error: labeled set has " << ds_dataset_cols(labeled.get())
              << " features, unlabeled set has " << d << "\n";
    std::exit(kExitUsage);
  }
  std::vector<double> features(static_cast<size_t>((n + m) * d));
  check(ds_dataset_features(unlabeled.get(), features.data()), "reading data");
  check(ds_dataset_features(labeled.get(),
                            features.data() + static_cast<size_t>(n * d)),
        "reading labeled data");
  std::vector<int32_t> labels(static_cast<size_t>(m));
  check(ds_dataset_anomaly_labels(labeled.get(), labels.data()),
        "reading labels");
  out.semi.assign(static_cast<size_t>(n), 0);
  out.semi.insert(out.semi.end(), labels.begin(), labels.end());
  ds_dataset* merged = nullptr;
  check(ds_dataset_create(features.data(), n + m, d, nullptr, nullptr, &merged),
        "merging datasets");
  out.merged = DatasetPtr{merged, &ds_dataset_free};
  return out;
}

std::string method_spec(const std::string& method, double eta, double lambda,
                        double eps, double nu, int trees, int psi) {
  std::ostringstream os;
  os << method << ",eta=" << eta << ",lambda=" << lambda << ",eps=" << eps
     << ",nu=" << nu << ",trees=" << trees << ",psi=" << psi;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepsad: deep semi-supervised anomaly detection"};
  app.require_subcommand(1);

  LogSink sink;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress output on stderr");

  ds_train_config cfg;
  ds_train_config_defaults(&cfg);
  bool desk = false;
  std::string loss_log;

  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--search-epochs", cfg.search_epochs,
                    "searching-phase epochs (default 50)");
    cmd->add_option("--search-lr", cfg.search_lr,
                    "searching-phase learning rate (default 1e-4)");
    cmd->add_option("--finetune-epochs", cfg.finetune_epochs,
                    "fine-tuning epochs (default 100)");
    cmd->add_option("--finetune-lr", cfg.finetune_lr,
                    "fine-tuning learning rate (default 1e-5)");
    cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size (default 200)");
    cmd->add_option("--seed", cfg.seed, "RNG seed (default 1)");
    cmd->add_flag("--desk", desk, "short schedule preset (20+40 epochs)");
    cmd->add_option("--loss-log", loss_log,
                    "write per-epoch losses (epoch<TAB>phase<TAB>loss) here");
  };

  // pretrain ----------------------------------------------------------
  auto* cmd_pre = app.add_subcommand("pretrain", "train an autoencoder");
  std::string data_path, arch = "32-16-8", out_path;
  cmd_pre->add_option("--data", data_path, "training CSV")->required();
  cmd_pre->add_option("--arch", arch, "hidden-output sizes, e.g. 32-16-8");
  cmd_pre->add_option("--out", out_path, "model file to write")->required();
  add_train_flags(cmd_pre);

  // train -------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "train a detector");
  std::string labeled_path, method = "deep-sad", pretrained_path;
  double eta = 1.0, lambda = 1e-6, inverse_eps = 1e-6, nu = 0.1;
  int if_trees = 100, if_psi = 256;
  cmd_train->add_option("--data", data_path, "unlabeled training CSV")->required();
  cmd_train->add_option("--labeled", labeled_path,
                        "labeled CSV with a `label` column (+1/-1)");
  cmd_train->add_option("--method", method,
                        "deep-sad|one-class|soft-boundary|supervised|kde|"
                        "iforest|hybrid-kde|hybrid-iforest");
  cmd_train->add_option("--arch", arch, "hidden-output sizes");
  cmd_train->add_option("--eta", eta, "labeled-term weight (default 1)");
  cmd_train->add_option("--lambda", lambda, "weight decay (default 1e-6)");
  cmd_train->add_option("--eps", inverse_eps,
                        "inverse-distance epsilon (default 1e-6)");
  cmd_train->add_option("--nu", nu, "soft-boundary slack fraction");
  cmd_train->add_option("--trees", if_trees, "isolation forest trees");
  cmd_train->add_option("--psi", if_psi, "isolation forest subsample");
  cmd_train->add_option("--pretrained", pretrained_path, "autoencoder model file");
  cmd_train->add_option("--out", out_path, "model file to write")->required();
  add_train_flags(cmd_train);

  // score -------------------------------------------------------------
  auto* cmd_score = app.add_subcommand("score", "score rows with a model");
  std::string model_path, scores_path;
  cmd_score->add_option("--model", model_path, "model file")->required();
  cmd_score->add_option("--data", data_path, "CSV to score")->required();
  cmd_score->add_option("--out", scores_path, "score file (one per row)");

  // scenario ----------------------------------------------------------
  auto* cmd_scen = app.add_subcommand("scenario", "run a scenario grid file");
  std::string grid_path, records_path;
  int workers = 1;
  cmd_scen->add_option("--grid", grid_path, "grid config file")->required();
  cmd_scen->add_option("--records", records_path, "record file to append")
      ->required();
  cmd_scen->add_option("--workers", workers, "parallel cells (default 1)");

  // benchmark-odds ------------------------------------------------------
  auto* cmd_bench =
      app.add_subcommand("benchmark-odds", "tabular benchmark protocol");
  std::vector<std::string> bench_data;
  std::string methods = "deep-sad";
  std::vector<uint64_t> seed_list;
  int num_seeds = 10;
  cmd_bench
      ->add_option("--data", bench_data,
                   "dataset as name=path; repeatable; CSV needs `label` column")
      ->required();
  cmd_bench->add_option("--methods", methods, "comma-separated method list");
  cmd_bench->add_option("--arch", arch, "hidden-output sizes");
  cmd_bench->add_option("--seeds", seed_list, "explicit seed list");
  cmd_bench->add_option("--num-seeds", num_seeds,
                        "use seeds 1..N when --seeds is absent (default 10)");
  cmd_bench->add_option("--records", records_path, "record file to append")
      ->required();
  cmd_bench->add_option("--workers", workers, "parallel cells (default 1)");
  add_train_flags(cmd_bench);

  // demo-toy ------------------------------------------------------------
  auto* cmd_toy = app.add_subcommand("demo-toy", "2D toy decision-surface demo");
  uint64_t toy_seed = 1;
  std::string latents_path;
  cmd_toy->add_option("--seed", toy_seed, "RNG seed");
  cmd_toy->add_option("--out", out_path, "grid score CSV")->required();
  cmd_toy->add_option("--latents", latents_path, "labeled-point latents CSV");

  // report --------------------------------------------------------------
  auto* cmd_report = app.add_subcommand("report", "aggregate a record file");
  std::string group_by = "dataset,method";
  cmd_report->add_option("--records", records_path, "record file")->required();
  cmd_report->add_option("--group-by", group_by, "comma-separated fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::exit(app.exit(e));
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::exit(kExitUsage);
  }

  sink.verbose = verbose;
  if (!loss_log.empty()) {
    sink.loss_file.open(loss_log);
    if (!sink.loss_file.good()) {
      std::cerr << "error: cannot write loss log " << loss_log << "\n";
      return kExitUsage;
    }
  }
  ds_set_logger(&log_callback, &sink);

  if (desk) {
    cfg.search_epochs = 20;
    cfg.finetune_epochs = 40;
  }

  if (app.got_subcommand(cmd_pre)) {
    DatasetPtr data = load_dataset(data_path);
    ds_model* model = nullptr;
    check(ds_pretrain_autoencoder(data.get(), arch.c_str(), &cfg, &model),
          "pretraining");
    ModelPtr holder{model, &ds_model_free};
    check(ds_model_save(model, out_path.c_str()), "saving " + out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  if (app.got_subcommand(cmd_train)) {
    TrainData td = assemble_train_data(data_path, labeled_path);
    ModelPtr pretrained{nullptr, &ds_model_free};
    if (!pretrained_path.empty()) pretrained = load_model(pretrained_path);
    const std::string spec =
        method_spec(method, eta, lambda, inverse_eps, nu, if_trees, if_psi);
    ds_model* model = nullptr;
    check(ds_train(td.merged.get(), td.semi.data(), spec.c_str(), arch.c_str(),
                   &cfg, pretrained.get(), &model),
          "training");
    ModelPtr holder{model, &ds_model_free};
    check(ds_model_save(model, out_path.c_str()), "saving " + out_path);
    std::cout << "wrote " << out_path << " (" << ds_model_kind(model) << ")\n";
    return 0;
  }

  if (app.got_subcommand(cmd_score)) {
    ModelPtr model = load_model(model_path);
    DatasetPtr data = load_dataset(data_path);
    const auto n = static_cast<size_t>(ds_dataset_rows(data.get()));
    std::vector<double> scores(n);
    check(ds_model_score(model.get(), data.get(), scores.data()), "scoring");

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!scores_path.empty()) {
      file.open(scores_path);
      if (!file.good()) {
        std::cerr << "error: cannot write " << scores_path << "\n";
        return kExitUsage;
      }
      out = &file;
    }
    char buf[40];
    for (double s : scores) {
      std::snprintf(buf, sizeof buf, "%.17g", s);
      *out << buf << '\n';
    }
    if (ds_dataset_has_anomaly_labels(data.get())) {
      std::vector<int32_t> labels(n);
      check(ds_dataset_anomaly_labels(data.get(), labels.data()),
            "reading labels");
      double auc = 0.0;
      check(ds_auc_roc(scores.data(), labels.data(),
                       static_cast<int64_t>(n), &auc),
            "computing AUC");
      std::snprintf(buf, sizeof buf, "%.6f", auc);
      *out << "# auc=" << buf << '\n';
      if (out != &std::cout) std::cout << "auc " << buf << "\n";
    }
    return 0;
  }

  if (app.got_subcommand(cmd_scen)) {
    int64_t written = 0;
    check(ds_run_scenario_grid(grid_path.c_str(), records_path.c_str(),
                               workers, &written),
          "running grid");
    std::cout << "wrote " << written << " records to " << records_path << "\n";
    return 0;
  }

  if (app.got_subcommand(cmd_bench)) {
    if (seed_list.empty()) {
      if (num_seeds < 1) {
        std::cerr << "error: empty seed list\n";
        return kExitUsage;
      }
      for (int s = 1; s <= num_seeds; ++s)
        seed_list.push_back(static_cast<uint64_t>(s));
    }
    size_t failures = 0;
    for (const auto& entry : bench_data) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --data expects name=path, got " << entry << "\n";
        return kExitUsage;
      }
      const std::string name = entry.substr(0, eq);
      const std::string path = entry.substr(eq + 1);
      char* summary = nullptr;
      const ds_status st = ds_run_odds_benchmark(
          path.c_str(), name.c_str(), methods.c_str(), arch.c_str(),
          seed_list.data(), static_cast<int64_t>(seed_list.size()),
          records_path.c_str(), &cfg, workers, &summary);
      if (st != DS_OK) {
        // per-dataset failures are isolated; the run continues
        std::cerr << "dataset " << name << " failed: " << ds_last_error()
                  << "\n";
        ++failures;
        continue;
      }
      std::cout << summary;
      ds_string_free(summary);
    }
    if (failures == bench_data.size()) return kExitRuntime;
    return 0;
  }

  if (app.got_subcommand(cmd_toy)) {
    check(ds_demo_toy(toy_seed, out_path.c_str(),
                      latents_path.empty() ? nullptr : latents_path.c_str()),
          "demo-toy");
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  if (app.got_subcommand(cmd_report)) {
    char* table = nullptr;
    check(ds_report(records_path.c_str(), group_by.c_str(), &table),
          "reporting");
    std::cout << table;
    ds_string_free(table);
    return 0;
  }

  return kExitUsage;
}
