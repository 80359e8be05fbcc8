#include "models/model.hpp"

#include <cmath>

#include "core/rng.hpp"
#include "models/losses.hpp"
#include "nn/adam.hpp"

namespace deepsad::models {

namespace {

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  require(a.cols() == b.cols(), ErrorCode::Shape, "vstack: column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  std::copy(b.values().begin(), b.values().end(),
            out.values().begin() + static_cast<long>(a.size()));
  return out;
}

void validate_config(const TrainingConfig& cfg) {
  require(cfg.search_epochs >= 0 && cfg.finetune_epochs >= 0,
          ErrorCode::InvalidArgument, "training config: epochs must be >= 0");
  require(cfg.search_lr > 0.0 && cfg.finetune_lr > 0.0,
          ErrorCode::InvalidArgument, "training config: learning rates must be > 0");
  require(cfg.batch_size >= 2, ErrorCode::InvalidArgument,
          "training config: batch size must be >= 2");
}

// Contiguous batch ranges over a (shuffled) index vector. A trailing batch
// of a single row is merged into its predecessor so batch norm always sees
// at least two rows.
std::vector<std::pair<size_t, size_t>> batch_ranges(size_t n, size_t batch) {
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t start = 0; start < n; start += batch)
    out.emplace_back(start, std::min(start + batch, n));
  if (out.size() >= 2 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

// loss_fn(outputs, row_indices) -> BatchLoss; post_batch(outputs) runs after
// the optimizer step (soft-boundary radius update).
template <class LossFn, class PostBatch>
std::vector<EpochLoss> run_epochs(nn::Network& net, const Matrix& data,
                                  const TrainingConfig& cfg, double lambda,
                                  LossFn&& loss_fn, PostBatch&& post_batch) {
  Rng shuffle_rng(mix_seed(cfg.seed, 1));
  nn::AdamState adam = nn::AdamState::for_network(net);
  auto params = net.parameters();

  std::vector<size_t> order(data.rows());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  struct Phase {
    const char* name;
    int epochs;
    double lr;
  };
  const Phase phases[] = {{"search", cfg.search_epochs, cfg.search_lr},
                          {"finetune", cfg.finetune_epochs, cfg.finetune_lr}};

  std::vector<EpochLoss> history;
  int epoch = 0;
  for (const auto& phase : phases) {
    for (int e = 0; e < phase.epochs; ++e, ++epoch) {
      if (cfg.shuffle) shuffle_rng.shuffle(order);
      double loss_sum = 0.0;
      size_t row_count = 0;
      for (const auto& [lo, hi] : batch_ranges(order.size(), cfg.batch_size)) {
        std::vector<size_t> rows(order.begin() + lo, order.begin() + hi);
        Matrix bx = data.take_rows(rows);
        nn::Tape tape;
        Matrix out = net.forward(bx, nn::Mode::Training, &tape);
        BatchLoss bl = loss_fn(out, rows);
        const double batch_loss = bl.data_loss + weight_decay_term(net, lambda);
        nn::Gradients grads = net.backward(tape, bl.output_grad);
        adam_step(params, grads, adam, phase.lr, lambda);
        net.bump_version();
        post_batch(out);
        loss_sum += batch_loss * static_cast<double>(rows.size());
        row_count += rows.size();
      }
      const double mean_loss = loss_sum / static_cast<double>(row_count);
      require(std::isfinite(mean_loss), ErrorCode::Numeric,
              "training diverged (non-finite loss) at epoch " +
                  std::to_string(epoch));
      history.push_back({epoch, phase.name, mean_loss});
    }
  }
  return history;
}

bool specs_equal(const std::vector<nn::LayerSpec>& a,
                 const std::vector<nn::LayerSpec>& b) {
  return a == b;
}

}  // namespace

void SemiSupervisedSplit::validate() const {
  require(total_rows() >= 1, ErrorCode::InvalidArgument,
          "split: no training rows");
  require(labeled.rows() == labeled_y.size(), ErrorCode::Shape,
          "split: one label per labeled row required");
  if (!unlabeled.empty() && !labeled.empty())
    require(unlabeled.cols() == labeled.cols(), ErrorCode::Shape,
            "split: unlabeled/labeled dimension mismatch");
  for (int y : labeled_y)
    require(y == 1 || y == -1, ErrorCode::InvalidArgument,
            "split: labeled targets must be +1 or -1");
}

std::string method_kind_name(MethodKind k) {
  switch (k) {
    case MethodKind::DeepSad: return "deep-sad";
    case MethodKind::OneClass: return "one-class";
    case MethodKind::SoftBoundary: return "soft-boundary";
    case MethodKind::SupervisedBce: return "supervised";
    case MethodKind::AutoencoderModel: return "autoencoder";
    case MethodKind::Kde: return "kde";
    case MethodKind::Iforest: return "iforest";
    case MethodKind::HybridKde: return "hybrid-kde";
    case MethodKind::HybridIforest: return "hybrid-iforest";
  }
  return "unknown";
}

Matrix Autoencoder::encode(const Matrix& x) const {
  return encoder().infer(x);
}

double Autoencoder::reconstruction_mse(const Matrix& x) const {
  Matrix rec = net.infer(x);
  double s = 0.0;
  for (size_t i = 0; i < rec.size(); ++i) {
    const double d = rec.values()[i] - x.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(rec.size());
}

Autoencoder make_autoencoder(size_t input_dim, const std::vector<size_t>& dims,
                             bool batchnorm, double leakiness, bool bias,
                             uint64_t seed) {
  auto enc_specs = nn::mlp_specs(input_dim, dims, batchnorm, leakiness, bias);
  std::vector<size_t> dec_dims(dims.rbegin() + 1, dims.rend());
  dec_dims.push_back(input_dim);
  auto dec_specs = nn::mlp_specs(dims.back(), dec_dims, batchnorm, leakiness, bias);

  Autoencoder ae;
  ae.net = nn::Network::from_specs(enc_specs);
  ae.encoder_layers = enc_specs.size();
  ae.net.append(nn::Network::from_specs(dec_specs));
  Rng rng(mix_seed(seed, 0));
  ae.net.init_glorot(rng);
  return ae;
}

namespace {

// Recover the canonical MLP shape parameters from an encoder spec list; the
// autoencoder mirrors them for the decoder.
struct MlpShape {
  std::vector<size_t> dims;
  bool batchnorm = false;
  double leakiness = 0.1;
  bool bias = false;
};

MlpShape shape_from_specs(const std::vector<nn::LayerSpec>& specs) {
  MlpShape s;
  bool first_dense = true;
  for (const auto& spec : specs) {
    switch (spec.kind) {
      case nn::LayerKind::Dense:
        s.dims.push_back(spec.fan_out);
        if (first_dense) {
          s.bias = spec.use_bias;
          first_dense = false;
        }
        break;
      case nn::LayerKind::BatchNorm:
        s.batchnorm = true;
        break;
      case nn::LayerKind::LeakyRelu:
        s.leakiness = spec.leakiness;
        break;
    }
  }
  return s;
}

}  // namespace

Autoencoder pretrain_autoencoder(const Matrix& data,
                                 const std::vector<nn::LayerSpec>& encoder_arch,
                                 const TrainingConfig& cfg, double lambda) {
  require(!data.empty(), ErrorCode::InvalidArgument,
          "pretrain_autoencoder: empty data");
  nn::validate_specs(encoder_arch);
  validate_config(cfg);
  require(encoder_arch.front().fan_in == data.cols(), ErrorCode::Shape,
          "pretrain_autoencoder: architecture input dim does not match data");

  const MlpShape shape = shape_from_specs(encoder_arch);
  require(specs_equal(encoder_arch,
                      nn::mlp_specs(data.cols(), shape.dims, shape.batchnorm,
                                    shape.leakiness, shape.bias)),
          ErrorCode::InvalidArgument,
          "pretrain_autoencoder: architecture is not a canonical MLP stack");

  Autoencoder ae = make_autoencoder(data.cols(), shape.dims, shape.batchnorm,
                                    shape.leakiness, shape.bias, cfg.seed);

  const double inv_elems = 1.0 / static_cast<double>(data.cols());
  ae.history = run_epochs(
      ae.net, data, cfg, lambda,
      [&](const Matrix& out, const std::vector<size_t>& rows) {
        BatchLoss bl;
        bl.output_grad = Matrix(out.rows(), out.cols());
        const double scale =
            inv_elems / static_cast<double>(rows.size());
        double s = 0.0;
        for (size_t i = 0; i < rows.size(); ++i) {
          const double* oi = out.row(i);
          const double* xi = data.row(rows[i]);
          double* gi = bl.output_grad.row(i);
          for (size_t j = 0; j < out.cols(); ++j) {
            const double d = oi[j] - xi[j];
            s += d * d;
            gi[j] = 2.0 * scale * d;
          }
        }
        bl.data_loss = s * scale;
        return bl;
      },
      [](const Matrix&) {});
  return ae;
}

std::vector<double> init_center(nn::Network& net, const Matrix& data) {
  require(data.rows() >= 1, ErrorCode::InvalidArgument,
          "init_center: at least one row required");
  // one statistics-priming pass so inference-mode batch norm sees the data
  if (data.rows() >= 2) net.forward(data, nn::Mode::Training);
  Matrix z = net.infer(data);
  std::vector<double> c(z.cols(), 0.0);
  for (size_t i = 0; i < z.rows(); ++i) {
    const double* zi = z.row(i);
    for (size_t j = 0; j < z.cols(); ++j) c[j] += zi[j];
  }
  for (double& x : c) x /= static_cast<double>(z.rows());
  return c;
}

std::vector<double> NetModel::score(const Matrix& x) const {
  Matrix z = net.infer(x);
  std::vector<double> s(z.rows());
  if (kind == MethodKind::SupervisedBce) {
    for (size_t i = 0; i < z.rows(); ++i)
      s[i] = 1.0 / (1.0 + std::exp(-z.at(i, 0)));
    return s;
  }
  for (size_t i = 0; i < z.rows(); ++i) {
    const double* zi = z.row(i);
    double d2 = 0.0;
    for (size_t j = 0; j < z.cols(); ++j) {
      const double c = zi[j] - center[j];
      d2 += c * c;
    }
    s[i] = std::sqrt(d2);
  }
  return s;
}

NetModel train_model(const SemiSupervisedSplit& split,
                     const std::vector<nn::LayerSpec>& arch,
                     const TrainingConfig& cfg, MethodKind mode,
                     const Hyper& hp, const Autoencoder* pretrained) {
  split.validate();
  validate_config(cfg);
  nn::validate_specs(arch);
  require(hp.eta > 0.0, ErrorCode::InvalidArgument, "train: eta must be > 0");
  require(hp.lambda >= 0.0, ErrorCode::InvalidArgument,
          "train: lambda must be >= 0");
  require(hp.inverse_eps > 0.0, ErrorCode::InvalidArgument,
          "train: inverse_eps must be > 0");
  if (mode == MethodKind::SoftBoundary)
    require(hp.nu > 0.0 && hp.nu <= 1.0, ErrorCode::InvalidArgument,
            "train: nu must lie in (0,1]");

  const bool hypersphere = mode == MethodKind::DeepSad ||
                           mode == MethodKind::OneClass ||
                           mode == MethodKind::SoftBoundary;
  require(hypersphere || mode == MethodKind::SupervisedBce,
          ErrorCode::InvalidArgument, "train: not a network training mode");

  std::vector<nn::LayerSpec> net_arch = arch;
  if (mode == MethodKind::SupervisedBce) {
    // one scalar output unit; bias allowed since classification has no
    // collapse concern
    size_t d = arch.front().fan_in;
    for (const auto& s : arch)
      if (s.kind == nn::LayerKind::Dense) d = s.fan_out;
    net_arch.push_back({nn::LayerKind::Dense, static_cast<uint32_t>(d), 1, true,
                        0.1, 0.1});
  }

  Rng init_rng(mix_seed(cfg.seed, 0));
  nn::Network net;
  if (pretrained) {
    require(specs_equal(pretrained->encoder().specs(), arch),
            ErrorCode::InvalidArgument,
            "train: pretrained encoder architecture does not match");
    if (mode == MethodKind::SupervisedBce) {
      net = nn::Network::from_specs(net_arch);
      net.init_glorot(init_rng);
      nn::Network enc = pretrained->encoder();
      for (size_t i = 0; i < enc.layer_count(); ++i) net.layer(i) = enc.layer(i);
      net.bump_version();
    } else {
      net = pretrained->encoder();
    }
  } else {
    net = nn::Network::from_specs(net_arch);
    net.init_glorot(init_rng);
  }

  // Unsupervised objectives see only the unlabeled rows; Deep SAD and the
  // supervised classifier train on everything.
  Matrix data;
  std::vector<int> row_labels;
  if (mode == MethodKind::OneClass || mode == MethodKind::SoftBoundary) {
    data = split.unlabeled;
    require(data.rows() >= 1, ErrorCode::InvalidArgument,
            "train: no usable samples for the unsupervised objective");
    row_labels.assign(data.rows(), 0);
  } else {
    data = vstack(split.unlabeled, split.labeled);
    row_labels.assign(split.unlabeled.rows(), 0);
    row_labels.insert(row_labels.end(), split.labeled_y.begin(),
                      split.labeled_y.end());
  }

  NetModel model;
  model.kind = mode;
  model.hp = hp;

  if (hypersphere) {
    Matrix center_data = split.unlabeled;
    if (mode == MethodKind::DeepSad) {
      // include labeled normals: more data, still excludes anomalies
      std::vector<size_t> keep;
      for (size_t i = 0; i < split.labeled_y.size(); ++i)
        if (split.labeled_y[i] == 1) keep.push_back(i);
      if (!keep.empty())
        center_data = vstack(split.unlabeled, split.labeled.take_rows(keep));
    }
    require(center_data.rows() >= 1, ErrorCode::InvalidArgument,
            "train: no usable samples to fix the hypersphere center");
    model.center = init_center(net, center_data);
  }

  std::vector<int> bce_targets;
  if (mode == MethodKind::SupervisedBce) {
    // unlabeled rows are assumed normal (y=+1 -> target 0)
    bce_targets.reserve(row_labels.size());
    for (int y : row_labels) bce_targets.push_back(y == -1 ? 1 : 0);
  }

  model.radius_sq = 0.0;
  model.history = run_epochs(
      net, data, cfg, hp.lambda,
      [&](const Matrix& out, const std::vector<size_t>& rows) -> BatchLoss {
        switch (mode) {
          case MethodKind::DeepSad: {
            std::vector<int> labels(rows.size());
            for (size_t i = 0; i < rows.size(); ++i)
              labels[i] = row_labels[rows[i]];
            return deep_sad_batch(out, labels, model.center, hp.eta,
                                  hp.inverse_eps);
          }
          case MethodKind::OneClass:
            return one_class_batch(out, model.center);
          case MethodKind::SoftBoundary:
            return soft_boundary_batch(out, model.center, model.radius_sq,
                                       hp.nu);
          default: {
            std::vector<int> targets(rows.size());
            for (size_t i = 0; i < rows.size(); ++i)
              targets[i] = bce_targets[rows[i]];
            return bce_batch(out, targets);
          }
        }
      },
      [&](const Matrix& out) {
        if (mode == MethodKind::SoftBoundary)
          model.radius_sq =
              update_radius(squared_distances(out, model.center), hp.nu);
      });

  model.net = std::move(net);
  return model;
}

}  // namespace deepsad::models
