#include "deepsad.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>
#include <string>

#include "data/scaling.hpp"
#include "eval/metrics.hpp"
#include "exp/runner.hpp"
#include "models/entropy.hpp"
#include "models/model_file.hpp"

using namespace deepsad;

namespace {

constexpr const char* kVersion = "1.0.0";

thread_local std::string t_last_error;

ds_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;
std::mutex g_log_mutex;

void emit_log(const std::string& line) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (g_log_fn) g_log_fn(line.c_str(), g_log_user);
}

exp::LogFn logger() {
  {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    if (!g_log_fn) return {};
  }
  return [](const std::string& line) { emit_log(line); };
}

ds_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return DS_ERR_INVALID_ARGUMENT;
    case ErrorCode::Shape: return DS_ERR_SHAPE;
    case ErrorCode::Io: return DS_ERR_IO;
    case ErrorCode::Format: return DS_ERR_FORMAT;
    case ErrorCode::State: return DS_ERR_STATE;
    case ErrorCode::Numeric: return DS_ERR_NUMERIC;
    case ErrorCode::Infeasible: return DS_ERR_INFEASIBLE;
    case ErrorCode::Metric: return DS_ERR_METRIC;
    case ErrorCode::Internal: return DS_ERR_INTERNAL;
  }
  return DS_ERR_INTERNAL;
}

template <class Fn>
ds_status wrap(Fn&& fn) {
  try {
    fn();
    return DS_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return DS_ERR_INTERNAL;
  }
}

ds_status arg_error(const std::string& msg) {
  t_last_error = msg;
  return DS_ERR_INVALID_ARGUMENT;
}

// "name,key=value,key=value" -> name + option map
struct ParsedSpec {
  std::string name;
  std::map<std::string, std::string> opts;
};

ParsedSpec parse_spec(const std::string& spec) {
  ParsedSpec out;
  std::stringstream ss(spec);
  std::string tok;
  bool first = true;
  while (std::getline(ss, tok, ',')) {
    if (first) {
      out.name = tok;
      first = false;
      continue;
    }
    const auto eq = tok.find('=');
    require(eq != std::string::npos, ErrorCode::InvalidArgument,
            "spec option without '=': " + tok);
    out.opts[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  require(!out.name.empty(), ErrorCode::InvalidArgument, "empty spec string");
  return out;
}

double opt_double(const ParsedSpec& s, const std::string& key, double fallback) {
  const auto it = s.opts.find(key);
  if (it == s.opts.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "bad number for " + key + ": " + it->second);
  }
}

long opt_long(const ParsedSpec& s, const std::string& key, long fallback) {
  const auto it = s.opts.find(key);
  if (it == s.opts.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "bad integer for " + key + ": " + it->second);
  }
}

models::TrainingConfig to_cpp(const ds_train_config* cfg) {
  models::TrainingConfig out;
  if (!cfg) return out;
  out.search_epochs = cfg->search_epochs;
  out.search_lr = cfg->search_lr;
  out.finetune_epochs = cfg->finetune_epochs;
  out.finetune_lr = cfg->finetune_lr;
  out.batch_size = cfg->batch_size;
  out.seed = cfg->seed;
  out.shuffle = cfg->shuffle != 0;
  return out;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

struct ds_dataset {
  data::Dataset ds;
};

struct ds_model {
  models::AnyModel model;
  std::map<std::string, std::string> meta;
};

extern "C" {

const char* ds_version(void) { return kVersion; }

const char* ds_last_error(void) { return t_last_error.c_str(); }

void ds_set_logger(ds_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

/* datasets ---------------------------------------------------------- */

ds_status ds_dataset_load_csv(const char* path, ds_dataset** out) {
  if (!path || !out) return arg_error("ds_dataset_load_csv: null argument");
  return wrap([&] { *out = new ds_dataset{data::load_csv(path)}; });
}

ds_status ds_dataset_save_csv(const ds_dataset* ds, const char* path) {
  if (!ds || !path) return arg_error("ds_dataset_save_csv: null argument");
  return wrap([&] { data::save_csv(ds->ds, path); });
}

ds_status ds_dataset_create(const double* features, int64_t rows, int64_t cols,
                            const int32_t* anomaly_labels,
                            const int32_t* class_labels, ds_dataset** out) {
  if (!features || !out) return arg_error("ds_dataset_create: null argument");
  if (rows < 1 || cols < 1)
    return arg_error("ds_dataset_create: rows and cols must be positive");
  return wrap([&] {
    data::Dataset d;
    d.features = Matrix(static_cast<size_t>(rows), static_cast<size_t>(cols));
    std::memcpy(d.features.data(), features,
                sizeof(double) * static_cast<size_t>(rows * cols));
    if (anomaly_labels)
      d.anomaly_labels =
          std::vector<int>(anomaly_labels, anomaly_labels + rows);
    if (class_labels)
      d.class_labels = std::vector<int>(class_labels, class_labels + rows);
    d.validate();
    *out = new ds_dataset{std::move(d)};
  });
}

int64_t ds_dataset_rows(const ds_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->ds.rows()) : -1;
}

int64_t ds_dataset_cols(const ds_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->ds.cols()) : -1;
}

ds_status ds_dataset_features(const ds_dataset* ds, double* out) {
  if (!ds || !out) return arg_error("ds_dataset_features: null argument");
  std::memcpy(out, ds->ds.features.data(),
              sizeof(double) * ds->ds.features.size());
  return DS_OK;
}

int ds_dataset_has_anomaly_labels(const ds_dataset* ds) {
  return ds && ds->ds.anomaly_labels ? 1 : 0;
}

ds_status ds_dataset_anomaly_labels(const ds_dataset* ds, int32_t* out) {
  if (!ds || !out) return arg_error("ds_dataset_anomaly_labels: null argument");
  if (!ds->ds.anomaly_labels)
    return arg_error("dataset has no anomaly labels");
  for (size_t i = 0; i < ds->ds.anomaly_labels->size(); ++i)
    out[i] = (*ds->ds.anomaly_labels)[i];
  return DS_OK;
}

void ds_dataset_free(ds_dataset* ds) { delete ds; }

ds_status ds_scale_fit_apply(ds_scaling kind, ds_dataset* train,
                             ds_dataset* const* others, size_t n_others) {
  if (!train) return arg_error("ds_scale_fit_apply: null train dataset");
  if (kind == DS_SCALE_NONE) return DS_OK;
  return wrap([&] {
    const data::Scaler scaler = kind == DS_SCALE_MINMAX
                                    ? data::fit_minmax(train->ds.features)
                                    : data::fit_standardize(train->ds.features);
    scaler.apply_in_place(train->ds);
    for (size_t i = 0; i < n_others; ++i) {
      require(others && others[i], ErrorCode::InvalidArgument,
              "ds_scale_fit_apply: null dataset in others");
      scaler.apply_in_place(others[i]->ds);
    }
  });
}

/* training ---------------------------------------------------------- */

void ds_train_config_defaults(ds_train_config* cfg) {
  if (!cfg) return;
  const models::TrainingConfig d;
  cfg->search_epochs = d.search_epochs;
  cfg->search_lr = d.search_lr;
  cfg->finetune_epochs = d.finetune_epochs;
  cfg->finetune_lr = d.finetune_lr;
  cfg->batch_size = d.batch_size;
  cfg->seed = d.seed;
  cfg->shuffle = d.shuffle ? 1 : 0;
}

namespace {

struct ArchSpec {
  std::string dims;
  bool batchnorm = true;
  double leakiness = 0.1;
};

ArchSpec parse_arch(const char* arch) {
  require(arch && *arch, ErrorCode::InvalidArgument, "empty architecture spec");
  const ParsedSpec spec = parse_spec(arch);
  ArchSpec out;
  out.dims = spec.name;
  out.batchnorm = opt_long(spec, "batchnorm", 1) != 0;
  out.leakiness = opt_double(spec, "leakiness", 0.1);
  return out;
}

}  // namespace

ds_status ds_pretrain_autoencoder(const ds_dataset* data_in, const char* arch,
                                  const ds_train_config* cfg, ds_model** out) {
  if (!data_in || !out) return arg_error("ds_pretrain_autoencoder: null argument");
  return wrap([&] {
    const ArchSpec a = parse_arch(arch);
    const auto specs = exp::build_arch(data_in->ds.cols(), a.dims, a.batchnorm,
                                       a.leakiness);
    const auto tcfg = to_cpp(cfg);
    models::Autoencoder ae =
        models::pretrain_autoencoder(data_in->ds.features, specs, tcfg);
    if (auto log = logger()) {
      for (const auto& el : ae.history) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "epoch %d\t%s\t%.9g", el.epoch,
                      el.phase.c_str(), el.mean_loss);
        log(buf);
      }
    }
    auto* handle = new ds_model;
    handle->meta["arch"] = arch;
    handle->meta["seed"] = std::to_string(tcfg.seed);
    handle->model = std::move(ae);
    *out = handle;
  });
}

ds_status ds_train(const ds_dataset* data_in, const int32_t* semi_labels,
                   const char* method, const char* arch,
                   const ds_train_config* cfg, const ds_model* pretrained,
                   ds_model** out) {
  if (!data_in || !method || !out) return arg_error("ds_train: null argument");
  return wrap([&] {
    const ParsedSpec mspec = parse_spec(method);
    const ArchSpec a = parse_arch(arch);
    const auto specs =
        exp::build_arch(data_in->ds.cols(), a.dims, a.batchnorm, a.leakiness);
    const auto tcfg = to_cpp(cfg);

    exp::MethodParams params;
    params.hp.eta = opt_double(mspec, "eta", 1.0);
    params.hp.lambda = opt_double(mspec, "lambda", 1e-6);
    params.hp.inverse_eps = opt_double(mspec, "eps", 1e-6);
    params.hp.nu = opt_double(mspec, "nu", 0.1);
    params.if_trees = static_cast<int>(opt_long(mspec, "trees", 100));
    params.if_psi = static_cast<int>(opt_long(mspec, "psi", 256));
    params.kde_folds = static_cast<int>(opt_long(mspec, "folds", 5));
    params.pretrain = false;  // only explicit handles pretrain here

    models::SemiSupervisedSplit split;
    const size_t n = data_in->ds.rows();
    if (!semi_labels) {
      split.unlabeled = data_in->ds.features;
    } else {
      std::vector<size_t> unl, lab;
      for (size_t i = 0; i < n; ++i) {
        require(semi_labels[i] == 0 || semi_labels[i] == 1 ||
                    semi_labels[i] == -1,
                ErrorCode::InvalidArgument,
                "semi labels must be 0, +1 or -1");
        (semi_labels[i] == 0 ? unl : lab).push_back(i);
      }
      split.unlabeled = data_in->ds.features.take_rows(unl);
      split.labeled = data_in->ds.features.take_rows(lab);
      for (size_t i : lab) split.labeled_y.push_back(semi_labels[i]);
    }

    const models::Autoencoder* ae = nullptr;
    if (pretrained) {
      ae = std::get_if<models::Autoencoder>(&pretrained->model);
      require(ae != nullptr, ErrorCode::InvalidArgument,
              "pretrained handle is not an autoencoder");
    }

    models::AnyModel model =
        exp::fit_method(mspec.name, params, split, specs, tcfg, ae);
    if (auto log = logger()) {
      if (const auto* nm = std::get_if<models::NetModel>(&model)) {
        for (const auto& el : nm->history) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "epoch %d\t%s\t%.9g", el.epoch,
                        el.phase.c_str(), el.mean_loss);
          log(buf);
        }
      }
    }
    auto* handle = new ds_model;
    handle->model = std::move(model);
    handle->meta["method"] = mspec.name;
    handle->meta["arch"] = arch;
    handle->meta["seed"] = std::to_string(tcfg.seed);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%g", params.hp.eta);
    handle->meta["eta"] = buf;
    std::snprintf(buf, sizeof buf, "%g", params.hp.lambda);
    handle->meta["lambda"] = buf;
    std::snprintf(buf, sizeof buf, "%g", params.hp.inverse_eps);
    handle->meta["inverse_eps"] = buf;
    if (mspec.name == "soft-boundary") {
      std::snprintf(buf, sizeof buf, "%g", params.hp.nu);
      handle->meta["nu"] = buf;
    }
    *out = handle;
  });
}

ds_status ds_model_score(const ds_model* model, const ds_dataset* ds,
                         double* out) {
  if (!model || !ds || !out) return arg_error("ds_model_score: null argument");
  return wrap([&] {
    const auto scores = models::score_model(model->model, ds->ds.features);
    std::copy(scores.begin(), scores.end(), out);
  });
}

ds_status ds_model_save(const ds_model* model, const char* path) {
  if (!model || !path) return arg_error("ds_model_save: null argument");
  return wrap([&] { models::save_model(model->model, path, model->meta); });
}

ds_status ds_model_load(const char* path, ds_model** out) {
  if (!path || !out) return arg_error("ds_model_load: null argument");
  return wrap([&] {
    auto loaded = models::load_model(path);
    auto* handle = new ds_model;
    handle->model = std::move(loaded.model);
    handle->meta = std::move(loaded.metadata);
    *out = handle;
  });
}

const char* ds_model_kind(const ds_model* model) {
  if (!model) return "";
  thread_local std::string kind;
  kind = models::model_kind(model->model);
  return kind.c_str();
}

int64_t ds_model_input_dim(const ds_model* model) {
  return model ? static_cast<int64_t>(models::model_input_dim(model->model))
               : -1;
}

const char* ds_model_meta(const ds_model* model, const char* key) {
  if (!model || !key) return nullptr;
  const auto it = model->meta.find(key);
  return it == model->meta.end() ? nullptr : it->second.c_str();
}

ds_status ds_model_epoch_losses(const ds_model* model, double* out,
                                int64_t* count) {
  if (!model || !count) return arg_error("ds_model_epoch_losses: null argument");
  const std::vector<models::EpochLoss>* history = nullptr;
  if (const auto* nm = std::get_if<models::NetModel>(&model->model))
    history = &nm->history;
  else if (const auto* ae = std::get_if<models::Autoencoder>(&model->model))
    history = &ae->history;
  if (!history) return arg_error("model has no training history");
  *count = static_cast<int64_t>(history->size());
  if (out)
    for (size_t i = 0; i < history->size(); ++i) out[i] = (*history)[i].mean_loss;
  return DS_OK;
}

ds_status ds_model_encode(const ds_model* model, const ds_dataset* ds,
                          double* out) {
  if (!model || !ds || !out) return arg_error("ds_model_encode: null argument");
  return wrap([&] {
    const auto* ae = std::get_if<models::Autoencoder>(&model->model);
    require(ae != nullptr, ErrorCode::InvalidArgument,
            "ds_model_encode: handle is not an autoencoder");
    const Matrix codes = ae->encode(ds->ds.features);
    std::memcpy(out, codes.data(), sizeof(double) * codes.size());
  });
}

int64_t ds_model_rep_dim(const ds_model* model) {
  if (!model) return -1;
  if (const auto* ae = std::get_if<models::Autoencoder>(&model->model))
    return static_cast<int64_t>(ae->encoder().output_dim());
  return -1;
}

void ds_model_free(ds_model* model) { delete model; }

/* metrics ----------------------------------------------------------- */

ds_status ds_auc_roc(const double* scores, const int32_t* labels, int64_t n,
                     double* out) {
  if (!scores || !labels || !out || n < 1)
    return arg_error("ds_auc_roc: bad arguments");
  return wrap([&] {
    std::vector<double> s(scores, scores + n);
    std::vector<int> y(labels, labels + n);
    *out = eval::auc_roc(s, y);
  });
}

ds_status ds_wilcoxon_signed_rank(const double* a, const double* b, int64_t n,
                                  double* statistic, double* p_two_sided) {
  if (!a || !b || !statistic || !p_two_sided || n < 1)
    return arg_error("ds_wilcoxon_signed_rank: bad arguments");
  return wrap([&] {
    std::vector<double> va(a, a + n), vb(b, b + n);
    const auto r = eval::wilcoxon_signed_rank(va, vb);
    *statistic = r.statistic;
    *p_two_sided = r.p_two_sided;
  });
}

ds_status ds_latent_entropy(const double* latents, int64_t rows, int64_t dim,
                            int isotropic, double* nats, int* degenerate) {
  if (!latents || !nats || rows < 1 || dim < 1)
    return arg_error("ds_latent_entropy: bad arguments");
  return wrap([&] {
    Matrix z(static_cast<size_t>(rows), static_cast<size_t>(dim));
    std::memcpy(z.data(), latents,
                sizeof(double) * static_cast<size_t>(rows * dim));
    const auto est = models::latent_entropy(z, isotropic != 0);
    *nats = est.nats;
    if (degenerate) *degenerate = est.degenerate ? 1 : 0;
  });
}

/* harness ----------------------------------------------------------- */

ds_status ds_run_scenario_grid(const char* grid_path, const char* records_path,
                               int32_t workers, int64_t* n_written) {
  if (!grid_path || !records_path)
    return arg_error("ds_run_scenario_grid: null path");
  return wrap([&] {
    const size_t n =
        exp::run_scenario_grid(grid_path, records_path, workers, logger());
    if (n_written) *n_written = static_cast<int64_t>(n);
  });
}

ds_status ds_run_odds_benchmark(const char* dataset_csv,
                                const char* dataset_name, const char* methods,
                                const char* arch, const uint64_t* seeds,
                                int64_t n_seeds, const char* records_path,
                                const ds_train_config* cfg, int32_t workers,
                                char** summary_out) {
  if (!dataset_csv || !dataset_name || !methods || !arch || !records_path)
    return arg_error("ds_run_odds_benchmark: null argument");
  if (!seeds || n_seeds < 1)
    return arg_error("ds_run_odds_benchmark: empty seed list");
  return wrap([&] {
    exp::OddsBenchSpec spec;
    spec.dataset_name = dataset_name;
    spec.dataset = data::load_csv(dataset_csv);
    spec.methods = split_csv_list(methods);
    const ArchSpec a = parse_arch(arch);
    spec.arch = a.dims;
    spec.batchnorm = a.batchnorm;
    spec.leakiness = a.leakiness;
    spec.seeds.assign(seeds, seeds + n_seeds);
    spec.base_cfg = to_cpp(cfg);
    spec.workers = workers;
    const std::string summary =
        exp::run_odds_benchmark(spec, records_path, logger());
    if (summary_out) {
      *summary_out = static_cast<char*>(std::malloc(summary.size() + 1));
      require(*summary_out != nullptr, ErrorCode::Internal, "out of memory");
      std::memcpy(*summary_out, summary.c_str(), summary.size() + 1);
    }
  });
}

ds_status ds_demo_toy(uint64_t seed, const char* grid_csv_path,
                      const char* latents_csv_path) {
  if (!grid_csv_path) return arg_error("ds_demo_toy: null output path");
  return wrap([&] {
    exp::demo_toy(seed, grid_csv_path,
                  latents_csv_path ? latents_csv_path : "", logger());
  });
}

ds_status ds_report(const char* records_path, const char* group_by,
                    char** table_out) {
  if (!records_path || !group_by || !table_out)
    return arg_error("ds_report: null argument");
  return wrap([&] {
    const std::string table =
        exp::report(records_path, split_csv_list(group_by));
    *table_out = static_cast<char*>(std::malloc(table.size() + 1));
    require(*table_out != nullptr, ErrorCode::Internal, "out of memory");
    std::memcpy(*table_out, table.c_str(), table.size() + 1);
  });
}

void ds_string_free(char* s) { std::free(s); }

}  // extern "C"
