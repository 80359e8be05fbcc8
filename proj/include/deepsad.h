/* C API for the deepsad library: semi-supervised anomaly detection via
 * hypersphere-distance minimization, with shallow baselines and an
 * experiment harness.
 *
 * All functions returning ds_status set a thread-local error message
 * retrievable via ds_last_error() on failure. Handles are opaque; free them
 * with the matching *_free function.
 */

#ifndef DEEPSAD_H
#define DEEPSAD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ds_status {
  DS_OK = 0,
  DS_ERR_INVALID_ARGUMENT = 1,
  DS_ERR_SHAPE = 2,
  DS_ERR_IO = 3,
  DS_ERR_FORMAT = 4,
  DS_ERR_STATE = 5,
  DS_ERR_NUMERIC = 6,
  DS_ERR_INFEASIBLE = 7,
  DS_ERR_METRIC = 8,
  DS_ERR_INTERNAL = 9
} ds_status;

const char* ds_version(void);

/* message describing the most recent failure on this thread */
const char* ds_last_error(void);

/* line-oriented progress output (training losses, grid progress); pass NULL
 * to disable */
typedef void (*ds_log_fn)(const char* line, void* user);
void ds_set_logger(ds_log_fn fn, void* user);

/* ------------------------------------------------------------------ */
/* datasets                                                            */

typedef struct ds_dataset ds_dataset;

/* CSV with a header row; reserved columns: `label` (+1 normal / -1 anomaly)
 * and `class` (integer class id); all other columns are numeric features */
ds_status ds_dataset_load_csv(const char* path, ds_dataset** out);
ds_status ds_dataset_save_csv(const ds_dataset* ds, const char* path);

/* features row-major; labels may be NULL */
ds_status ds_dataset_create(const double* features, int64_t rows, int64_t cols,
                            const int32_t* anomaly_labels,
                            const int32_t* class_labels, ds_dataset** out);

int64_t ds_dataset_rows(const ds_dataset* ds);
int64_t ds_dataset_cols(const ds_dataset* ds);
ds_status ds_dataset_features(const ds_dataset* ds, double* out);
int ds_dataset_has_anomaly_labels(const ds_dataset* ds);
ds_status ds_dataset_anomaly_labels(const ds_dataset* ds, int32_t* out);
void ds_dataset_free(ds_dataset* ds);

typedef enum ds_scaling {
  DS_SCALE_NONE = 0,
  DS_SCALE_MINMAX = 1,
  DS_SCALE_STANDARDIZE = 2
} ds_scaling;

/* fits the scaler on `train` only, then transforms train and every dataset
 * in `others` in place */
ds_status ds_scale_fit_apply(ds_scaling kind, ds_dataset* train,
                             ds_dataset* const* others, size_t n_others);

/* ------------------------------------------------------------------ */
/* training and scoring                                                */

typedef struct ds_train_config {
  int32_t search_epochs;  /* phase 1 epoch count */
  double search_lr;       /* phase 1 learning rate */
  int32_t finetune_epochs;
  double finetune_lr;
  int32_t batch_size;
  uint64_t seed;
  int32_t shuffle; /* 0/1 */
} ds_train_config;

/* 50 epochs at 1e-4 then 100 at 1e-5, batch 200, shuffle on */
void ds_train_config_defaults(ds_train_config* cfg);

typedef struct ds_model ds_model;

/* `arch` lists hidden and output sizes, e.g. "32-16-8"; options may follow
 * as key=value pairs separated by commas: "32-16-8,batchnorm=0,leakiness=0.2" */
ds_status ds_pretrain_autoencoder(const ds_dataset* data, const char* arch,
                                  const ds_train_config* cfg, ds_model** out);

/* semi_labels: one of {0 unlabeled, +1 labeled normal, -1 labeled anomaly}
 * per row; NULL means all unlabeled.
 *
 * method: "deep-sad" | "one-class" | "soft-boundary" | "supervised" |
 *         "kde" | "iforest" | "hybrid-kde" | "hybrid-iforest",
 * optionally followed by key=value settings separated by commas, e.g.
 * "deep-sad,eta=2" or "soft-boundary,nu=0.05" or "iforest,trees=200,psi=128".
 * Recognized keys: eta, lambda, eps, nu, trees, psi, folds.
 *
 * `pretrained` must be an autoencoder handle (or NULL); deep methods start
 * from its encoder weights and hybrids encode through it. */
ds_status ds_train(const ds_dataset* data, const int32_t* semi_labels,
                   const char* method, const char* arch,
                   const ds_train_config* cfg, const ds_model* pretrained,
                   ds_model** out);

/* one score per row, higher = more anomalous; `out` holds rows() doubles */
ds_status ds_model_score(const ds_model* model, const ds_dataset* ds,
                         double* out);

ds_status ds_model_save(const ds_model* model, const char* path);
ds_status ds_model_load(const char* path, ds_model** out);
const char* ds_model_kind(const ds_model* model);
int64_t ds_model_input_dim(const ds_model* model);

/* metadata recorded at training time ("eta", "arch", ...); returns NULL when
 * the key is absent */
const char* ds_model_meta(const ds_model* model, const char* key);

/* per-epoch training losses; call with out=NULL to query the count */
ds_status ds_model_epoch_losses(const ds_model* model, double* out,
                                int64_t* count);

/* autoencoder handles only: bottleneck codes (rows x rep_dim) */
ds_status ds_model_encode(const ds_model* model, const ds_dataset* ds,
                          double* out);
int64_t ds_model_rep_dim(const ds_model* model);

void ds_model_free(ds_model* model);

/* ------------------------------------------------------------------ */
/* metrics                                                             */

/* labels: +1 normal / -1 anomaly; anomalies are the positive class and ties
 * count half */
ds_status ds_auc_roc(const double* scores, const int32_t* labels, int64_t n,
                     double* out);

/* paired two-sided Wilcoxon signed-rank test; zero differences dropped */
ds_status ds_wilcoxon_signed_rank(const double* a, const double* b, int64_t n,
                                  double* statistic, double* p_two_sided);

/* Gaussian entropy upper bound in nats over row-major latents
 * (rows x dim); degenerate (singular covariance) sets *degenerate and
 * returns -inf in *nats */
ds_status ds_latent_entropy(const double* latents, int64_t rows, int64_t dim,
                            int isotropic, double* nats, int* degenerate);

/* ------------------------------------------------------------------ */
/* experiment harness                                                  */

/* Executes a scenario grid file and appends one record line per cell to
 * records_path (resumable: existing cells are skipped). */
ds_status ds_run_scenario_grid(const char* grid_path, const char* records_path,
                               int32_t workers, int64_t* n_written);

/* Benchmark protocol on a labeled tabular dataset: per seed, stratified
 * 60:40 split, standardization fit on the train partition, 1% labeled
 * anomalies, clean unlabeled pool. methods is comma separated. Returns a
 * summary table (ds_string_free). */
ds_status ds_run_odds_benchmark(const char* dataset_csv,
                                const char* dataset_name, const char* methods,
                                const char* arch, const uint64_t* seeds,
                                int64_t n_seeds, const char* records_path,
                                const ds_train_config* cfg, int32_t workers,
                                char** summary_out);

/* 2D toy demo: trains Deep SAD and a supervised classifier, writes dense
 * grid scores (and optionally the labeled-point latents) for plotting */
ds_status ds_demo_toy(uint64_t seed, const char* grid_csv_path,
                      const char* latents_csv_path);

/* mean/std AUC table over a record file, grouped by comma-separated field
 * names */
ds_status ds_report(const char* records_path, const char* group_by,
                    char** table_out);

void ds_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DEEPSAD_H */
