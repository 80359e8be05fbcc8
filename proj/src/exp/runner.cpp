#include "exp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "baselines/hybrid.hpp"
#include "core/rng.hpp"
#include "data/scaling.hpp"
#include "eval/metrics.hpp"
#include "exp/gridfile.hpp"

namespace deepsad::exp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

models::SemiSupervisedSplit unlabeled_only(
    const models::SemiSupervisedSplit& split) {
  models::SemiSupervisedSplit out;
  out.unlabeled = split.unlabeled;
  return out;
}

Matrix all_training_rows(const models::SemiSupervisedSplit& split) {
  if (split.labeled.empty()) return split.unlabeled;
  if (split.unlabeled.empty()) return split.labeled;
  Matrix out(split.total_rows(), split.unlabeled.cols());
  std::copy(split.unlabeled.values().begin(), split.unlabeled.values().end(),
            out.values().begin());
  std::copy(split.labeled.values().begin(), split.labeled.values().end(),
            out.values().begin() + static_cast<long>(split.unlabeled.size()));
  return out;
}

}  // namespace

std::vector<nn::LayerSpec> build_arch(size_t input_dim, const std::string& arch,
                                      bool batchnorm, double leakiness) {
  return nn::mlp_specs(input_dim, nn::parse_dims(arch), batchnorm, leakiness,
                       /*bias=*/false);
}

models::AnyModel fit_method(const std::string& method,
                            const MethodParams& params,
                            const models::SemiSupervisedSplit& split,
                            const std::vector<nn::LayerSpec>& arch,
                            const models::TrainingConfig& tcfg,
                            const models::Autoencoder* pretrained) {
  using models::MethodKind;
  const auto kde_grid = params.kde_grid.empty()
                            ? baselines::default_bandwidth_grid()
                            : params.kde_grid;

  auto pretrain_on = [&](const Matrix& rows) {
    return models::pretrain_autoencoder(rows, arch, tcfg, params.hp.lambda);
  };

  if (method == "deep-sad" || method == "one-class" ||
      method == "soft-boundary") {
    MethodKind kind = MethodKind::DeepSad;
    if (method == "one-class") kind = MethodKind::OneClass;
    if (method == "soft-boundary") kind = MethodKind::SoftBoundary;
    // unsupervised variants train (and pretrain) on the unlabeled rows only
    const bool unsupervised = kind != MethodKind::DeepSad;
    const models::SemiSupervisedSplit used =
        unsupervised ? unlabeled_only(split) : split;
    std::optional<models::Autoencoder> ae;
    if (!pretrained && params.pretrain)
      ae = pretrain_on(all_training_rows(used));
    const models::Autoencoder* init = pretrained ? pretrained : (ae ? &*ae : nullptr);
    return models::train_model(used, arch, tcfg, kind, params.hp, init);
  }
  if (method == "supervised") {
    // Glorot initialization; no pretraining for the classifier
    return models::train_model(split, arch, tcfg, MethodKind::SupervisedBce,
                               params.hp, nullptr);
  }
  if (method == "kde") {
    return baselines::kde_fit(split.unlabeled, kde_grid, params.kde_folds,
                              tcfg.seed);
  }
  if (method == "iforest") {
    return baselines::iforest_fit(split.unlabeled, params.if_trees,
                                  params.if_psi, tcfg.seed);
  }
  if (method == "hybrid-kde" || method == "hybrid-iforest") {
    std::optional<models::Autoencoder> ae;
    if (!pretrained) ae = pretrain_on(split.unlabeled);
    baselines::ShallowSpec shallow;
    shallow.use_kde = method == "hybrid-kde";
    shallow.bandwidth_grid = kde_grid;
    shallow.folds = params.kde_folds;
    shallow.trees = params.if_trees;
    shallow.psi = params.if_psi;
    shallow.seed = tcfg.seed;
    return baselines::hybrid_fit(pretrained ? *pretrained : *ae, shallow,
                                 split.unlabeled);
  }
  fail(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
}

std::vector<double> fit_and_score(const std::string& method,
                                  const MethodParams& params,
                                  const models::SemiSupervisedSplit& split,
                                  const Matrix& test_x,
                                  const std::vector<nn::LayerSpec>& arch,
                                  const models::TrainingConfig& tcfg) {
  return models::score_model(
      fit_method(method, params, split, arch, tcfg), test_x);
}

namespace {

struct ParsedGrid {
  GridRun run;
  std::string scaling;
};

std::vector<uint64_t> parse_seed_list(const std::vector<std::string>& toks) {
  std::vector<uint64_t> seeds;
  for (const auto& t : toks) seeds.push_back(std::stoull(t));
  return seeds;
}

GridRun load_grid_impl(const std::string& grid_path) {
  const auto cfg = SectionedConfig::parse_file(grid_path);

  const std::string train_path = cfg.get("data", "train", "");
  const std::string test_path = cfg.get("data", "test", "");
  require(!train_path.empty() && !test_path.empty(), ErrorCode::Format,
          "grid file: [data] train and test paths are required");

  GridRun g;
  g.dataset_name = cfg.get("data", "dataset", "dataset");
  data::Dataset train = data::load_csv(train_path);
  data::Dataset test = data::load_csv(test_path);

  const std::string scaling = cfg.get("data", "scaling", "minmax");
  if (scaling == "minmax") {
    const auto scaler = data::fit_minmax(train.features);
    scaler.apply_in_place(train);
    scaler.apply_in_place(test);
  } else if (scaling == "standardize") {
    const auto scaler = data::fit_standardize(train.features);
    scaler.apply_in_place(train);
    scaler.apply_in_place(test);
  } else {
    require(scaling == "none", ErrorCode::Format,
            "grid file: scaling must be none|minmax|standardize");
  }
  g.train = std::move(train);
  g.test = std::move(test);

  g.base_cfg.search_epochs =
      static_cast<int>(cfg.get_long("train", "search_epochs", 50));
  g.base_cfg.search_lr = cfg.get_double("train", "search_lr", 1e-4);
  g.base_cfg.finetune_epochs =
      static_cast<int>(cfg.get_long("train", "finetune_epochs", 100));
  g.base_cfg.finetune_lr = cfg.get_double("train", "finetune_lr", 1e-5);
  g.base_cfg.batch_size = static_cast<int>(cfg.get_long("train", "batch_size", 200));
  g.base_cfg.shuffle = cfg.get_bool("train", "shuffle", true);
  g.batchnorm = cfg.get_bool("train", "batchnorm", true);
  g.leakiness = cfg.get_double("train", "leakiness", 0.1);
  g.params.pretrain = cfg.get_bool("train", "pretrain", true);
  g.params.hp.lambda = cfg.get_double("train", "lambda", 1e-6);
  g.params.hp.inverse_eps = cfg.get_double("train", "inverse_eps", 1e-6);
  g.params.if_trees = static_cast<int>(cfg.get_long("train", "if_trees", 100));
  g.params.if_psi = static_cast<int>(cfg.get_long("train", "if_psi", 256));
  g.params.kde_folds = static_cast<int>(cfg.get_long("train", "kde_folds", 5));

  const std::string default_arch = cfg.get("train", "arch", "32-16-8");

  auto list_or = [&](const std::string& key,
                     const std::string& fallback) -> std::vector<std::string> {
    auto v = cfg.get_list("grid", key);
    if (v.empty()) v.push_back(fallback);
    return v;
  };
  const auto methods = list_or("method", "deep-sad");
  const auto archs = list_or("arch", default_arch);
  const auto normal_classes = list_or("normal_class", "0");
  const auto gamma_ls = list_or("gamma_l", "0.0");
  const auto gamma_ps = list_or("gamma_p", "0.0");
  const auto k_ls = list_or("k_l", "1");
  const auto etas = list_or("eta", "1.0");
  const auto nus = list_or("nu", "0.1");
  const auto seeds = parse_seed_list(list_or("seed", "1"));

  for (const auto& arch : archs)
    for (const auto& method : methods)
      for (const auto& nc : normal_classes)
        for (const auto& gl : gamma_ls)
          for (const auto& gp : gamma_ps)
            for (const auto& kl : k_ls)
              for (const auto& eta : etas)
                for (const auto& nu : nus)
                  for (uint64_t seed : seeds) {
                    ScenarioCell cell;
                    cell.method = method;
                    cell.arch = arch;
                    cell.normal_class = std::stoi(nc);
                    cell.gamma_l = std::stod(gl);
                    cell.gamma_p = std::stod(gp);
                    cell.k_l = std::stoi(kl);
                    cell.eta = std::stod(eta);
                    cell.nu = std::stod(nu);
                    cell.seed = seed;
                    g.cells.push_back(std::move(cell));
                  }
  return g;
}

eval::EvalRecord record_shell(const GridRun& g, const ScenarioCell& cell) {
  eval::EvalRecord rec;
  rec.method = cell.method;
  rec.dataset = g.dataset_name;
  rec.normal_class = cell.normal_class;
  rec.gamma_l = cell.gamma_l;
  rec.gamma_p = cell.gamma_p;
  rec.k_l = cell.k_l;
  rec.seed = cell.seed;
  rec.extra["arch"] = cell.arch;
  if (cell.method == "deep-sad") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", cell.eta);
    rec.extra["eta"] = buf;
  }
  if (cell.method == "soft-boundary") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", cell.nu);
    rec.extra["nu"] = buf;
  }
  return rec;
}

// Runs jobs 0..n-1 on `workers` threads and flushes each job's output line
// in index order (single-writer discipline keeps record files deterministic).
void run_ordered(size_t n, int workers,
                 const std::function<std::string(size_t)>& job,
                 std::ofstream& out) {
  std::mutex mu;
  std::condition_variable cv;
  std::map<size_t, std::string> done;
  size_t next_job = 0, next_flush = 0;

  auto worker = [&] {
    for (;;) {
      size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_job >= n) return;
        idx = next_job++;
      }
      std::string line = job(idx);
      {
        std::lock_guard<std::mutex> lock(mu);
        done[idx] = std::move(line);
        while (!done.empty() && done.begin()->first == next_flush) {
          if (!done.begin()->second.empty())
            out << done.begin()->second << '\n' << std::flush;
          done.erase(done.begin());
          ++next_flush;
        }
      }
      cv.notify_all();
    }
  };

  const int nthreads = std::max(1, workers);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(nthreads));
  for (int i = 0; i < nthreads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

}  // namespace

GridRun load_grid(const std::string& grid_path) {
  return load_grid_impl(grid_path);
}

size_t run_scenario_grid(const std::string& grid_path,
                         const std::string& records_path, int workers,
                         const LogFn& log) {
  GridRun g = load_grid_impl(grid_path);

  std::set<std::string> finished;
  for (const auto& rec : eval::load_records(records_path))
    finished.insert(rec.cell_key());

  std::vector<size_t> pending;
  for (size_t i = 0; i < g.cells.size(); ++i)
    if (!finished.count(record_shell(g, g.cells[i]).cell_key()))
      pending.push_back(i);

  if (log)
    log("grid: " + std::to_string(g.cells.size()) + " cells, " +
        std::to_string(pending.size()) + " to run");
  if (pending.empty()) return 0;

  std::ofstream out(records_path, std::ios::app);
  require(out.good(), ErrorCode::Io,
          "cannot append to record file: " + records_path);

  std::atomic<size_t> written{0};
  auto job = [&](size_t pi) -> std::string {
    const ScenarioCell& cell = g.cells[pending[pi]];
    eval::EvalRecord rec = record_shell(g, cell);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      data::ScenarioConfig scfg;
      scfg.normal_class = cell.normal_class;
      scfg.gamma_l = cell.gamma_l;
      scfg.gamma_p = cell.gamma_p;
      scfg.k_l = cell.k_l;
      scfg.seed = cell.seed;
      auto scen = data::make_scenario(g.train, g.test, scfg);

      MethodParams params = g.params;
      params.hp.eta = cell.eta;
      params.hp.nu = cell.nu;
      models::TrainingConfig tcfg = g.base_cfg;
      tcfg.seed = cell.seed;
      const auto arch =
          build_arch(g.train.cols(), cell.arch, g.batchnorm, g.leakiness);
      const auto scores = fit_and_score(cell.method, params, scen.split,
                                        scen.test_x, arch, tcfg);
      rec.auc = eval::auc_roc(scores, scen.test_y);
      rec.wall_time = seconds_since(t0);
      written.fetch_add(1);
      if (log) log("cell done: " + rec.line());
      return rec.line();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::Metric) {
        if (log) log("cell skipped: " + rec.cell_key() + " : " + e.what());
        return "# skipped " + rec.cell_key() + " reason=" + e.what();
      }
      throw;
    }
  };
  run_ordered(pending.size(), workers, job, out);
  return written.load();
}

std::string run_odds_benchmark(const OddsBenchSpec& spec,
                               const std::string& records_path,
                               const LogFn& log) {
  require(!spec.seeds.empty(), ErrorCode::InvalidArgument,
          "benchmark: empty seed list");
  require(!spec.methods.empty(), ErrorCode::InvalidArgument,
          "benchmark: no methods");
  spec.dataset.validate();

  std::set<std::string> finished;
  for (const auto& rec : eval::load_records(records_path))
    finished.insert(rec.cell_key());

  struct Cell {
    std::string method;
    uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& m : spec.methods)
    for (uint64_t s : spec.seeds) cells.push_back({m, s});

  auto shell = [&](const Cell& c) {
    eval::EvalRecord rec;
    rec.method = c.method;
    rec.dataset = spec.dataset_name;
    rec.normal_class = -1;
    rec.gamma_l = spec.gamma_l;
    rec.gamma_p = 0.0;
    rec.k_l = 1;
    rec.seed = c.seed;
    rec.extra["arch"] = spec.arch;
    return rec;
  };

  std::vector<size_t> pending;
  for (size_t i = 0; i < cells.size(); ++i)
    if (!finished.count(shell(cells[i]).cell_key())) pending.push_back(i);

  if (!pending.empty()) {
    std::ofstream out(records_path, std::ios::app);
    require(out.good(), ErrorCode::Io,
            "cannot append to record file: " + records_path);
    auto job = [&](size_t pi) -> std::string {
      const Cell& cell = cells[pending[pi]];
      eval::EvalRecord rec = shell(cell);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        auto split = data::odds_split(spec.dataset, cell.seed, spec.gamma_l);
        const auto scaler = data::fit_standardize(split.train.features);
        const Matrix strain = scaler.apply(split.train.features);
        const Matrix stest = scaler.apply(split.test.features);
        const auto semi = split.semi(strain);

        models::TrainingConfig tcfg = spec.base_cfg;
        tcfg.seed = cell.seed;
        MethodParams params = spec.params;
        const auto arch = build_arch(strain.cols(), spec.arch, spec.batchnorm,
                                     spec.leakiness);
        const auto scores =
            fit_and_score(cell.method, params, semi, stest, arch, tcfg);
        rec.auc = eval::auc_roc(scores, *split.test.anomaly_labels);
        rec.wall_time = seconds_since(t0);
        if (log) log("benchmark cell done: " + rec.line());
        return rec.line();
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::Metric) {
          if (log) log("benchmark cell skipped: " + rec.cell_key());
          return "# skipped " + rec.cell_key() + " reason=" + e.what();
        }
        throw;
      }
    };
    run_ordered(pending.size(), spec.workers, job, out);
  }

  // summary over everything recorded for this dataset
  std::vector<eval::EvalRecord> records;
  for (const auto& rec : eval::load_records(records_path))
    if (rec.dataset == spec.dataset_name) records.push_back(rec);
  require(!records.empty(), ErrorCode::Internal, "benchmark: no records");

  std::string summary = eval::format_summary(
      eval::aggregate(records, {"dataset", "method"}), {"dataset", "method"});

  // pairwise Wilcoxon between methods, paired per seed
  for (size_t a = 0; a < spec.methods.size(); ++a) {
    for (size_t b = a + 1; b < spec.methods.size(); ++b) {
      std::map<uint64_t, double> auc_a, auc_b;
      for (const auto& rec : records) {
        if (rec.method == spec.methods[a]) auc_a[rec.seed] = rec.auc;
        if (rec.method == spec.methods[b]) auc_b[rec.seed] = rec.auc;
      }
      std::vector<double> va, vb;
      for (const auto& [seed, auc] : auc_a) {
        const auto it = auc_b.find(seed);
        if (it != auc_b.end()) {
          va.push_back(auc);
          vb.push_back(it->second);
        }
      }
      summary += "wilcoxon " + spec.methods[a] + " vs " + spec.methods[b];
      try {
        const auto w = eval::wilcoxon_signed_rank(va, vb);
        char buf[80];
        std::snprintf(buf, sizeof buf, ": W=%.1f p=%.4f n=%zu\n", w.statistic,
                      w.p_two_sided, w.n_used);
        summary += buf;
      } catch (const Error& e) {
        summary += std::string(": ") + e.what() + "\n";
      }
    }
  }
  return summary;
}

void demo_toy(uint64_t seed, const std::string& grid_csv_path,
              const std::string& latents_csv_path, const LogFn& log) {
  Rng rng(mix_seed(seed, 7));
  const size_t n_unlabeled = 200, n_labeled = 30;

  auto blob = [&](size_t n, double cx, double cy, double sd) {
    Matrix m(n, 2);
    for (size_t i = 0; i < n; ++i) {
      m.at(i, 0) = cx + sd * rng.normal();
      m.at(i, 1) = cy + sd * rng.normal();
    }
    return m;
  };

  models::SemiSupervisedSplit split;
  split.unlabeled = blob(n_unlabeled, 0.0, 0.0, 1.0);
  Matrix labeled_normals = blob(n_labeled, 0.0, 0.0, 1.0);
  Matrix labeled_anoms = blob(n_labeled, 4.0, 4.0, 0.5);
  split.labeled = Matrix(2 * n_labeled, 2);
  std::copy(labeled_normals.values().begin(), labeled_normals.values().end(),
            split.labeled.values().begin());
  std::copy(labeled_anoms.values().begin(), labeled_anoms.values().end(),
            split.labeled.values().begin() +
                static_cast<long>(labeled_normals.size()));
  split.labeled_y.assign(n_labeled, 1);
  split.labeled_y.insert(split.labeled_y.end(), n_labeled, -1);

  models::TrainingConfig tcfg;
  tcfg.search_epochs = 20;
  tcfg.finetune_epochs = 40;
  tcfg.batch_size = 64;
  tcfg.seed = seed;

  const auto arch = build_arch(2, "16-8-2", true, 0.1);
  models::Hyper hp;
  models::Autoencoder ae =
      models::pretrain_autoencoder(all_training_rows(split), arch, tcfg, hp.lambda);
  models::NetModel sad = models::train_model(split, arch, tcfg,
                                             models::MethodKind::DeepSad, hp, &ae);
  models::NetModel sup = models::train_model(
      split, arch, tcfg, models::MethodKind::SupervisedBce, hp, nullptr);
  if (log) log("demo-toy: models trained");

  // dense score grid for external plotting
  const double lo = -8.0, hi = 8.0, step = 0.1;
  std::vector<double> axis;
  for (double v = lo; v <= hi + 1e-9; v += step) axis.push_back(v);
  Matrix grid(axis.size() * axis.size(), 2);
  size_t r = 0;
  for (double y : axis)
    for (double x : axis) {
      grid.at(r, 0) = x;
      grid.at(r, 1) = y;
      ++r;
    }
  const auto sad_scores = sad.score(grid);
  const auto sup_scores = sup.score(grid);

  std::ofstream out(grid_csv_path);
  require(out.good(), ErrorCode::Io, "cannot write " + grid_csv_path);
  out << "x,y,score_deepsad,score_supervised\n";
  char buf[160];
  for (size_t i = 0; i < grid.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", grid.at(i, 0),
                  grid.at(i, 1), sad_scores[i], sup_scores[i]);
    out << buf;
  }
  require(out.good(), ErrorCode::Io, "write failed: " + grid_csv_path);

  if (!latents_csv_path.empty()) {
    std::ofstream lf(latents_csv_path);
    require(lf.good(), ErrorCode::Io, "cannot write " + latents_csv_path);
    lf << "z0,z1,group\n";
    const Matrix z = sad.net.infer(split.labeled);
    for (size_t i = 0; i < z.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%s\n", z.at(i, 0), z.at(i, 1),
                    split.labeled_y[i] == 1 ? "normal" : "anomaly");
      lf << buf;
    }
    require(lf.good(), ErrorCode::Io, "write failed: " + latents_csv_path);
  }
}

std::string report(const std::string& records_path,
                   const std::vector<std::string>& group_by) {
  const auto records = eval::load_records(records_path);
  require(!records.empty(), ErrorCode::InvalidArgument,
          "report: no records in " + records_path);
  return eval::format_summary(eval::aggregate(records, group_by), group_by);
}

}  // namespace deepsad::exp
