#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "nn/network.hpp"

namespace deepsad::models {

// Two-phase learning-rate schedule: a searching phase followed by a
// fine-tuning phase at a tenth of the rate.
struct TrainingConfig {
  int search_epochs = 50;
  double search_lr = 1e-4;
  int finetune_epochs = 100;
  double finetune_lr = 1e-5;
  int batch_size = 200;
  uint64_t seed = 1;
  bool shuffle = true;
};

struct EpochLoss {
  int epoch;
  std::string phase;  // "search" | "finetune"
  double mean_loss;
};

// n unlabeled rows plus m labeled rows with labels in {+1 normal, -1 anomaly}.
struct SemiSupervisedSplit {
  Matrix unlabeled;
  Matrix labeled;
  std::vector<int> labeled_y;

  size_t total_rows() const { return unlabeled.rows() + labeled.rows(); }
  void validate() const;
};

enum class MethodKind {
  DeepSad,
  OneClass,
  SoftBoundary,
  SupervisedBce,
  AutoencoderModel,
  Kde,
  Iforest,
  HybridKde,
  HybridIforest,
};

std::string method_kind_name(MethodKind k);

struct Hyper {
  double eta = 1.0;
  double lambda = 1e-6;
  double inverse_eps = 1e-6;
  double nu = 0.1;  // soft boundary only
};

// Encoder + symmetric decoder stacked into one sequential network; the
// bottleneck sits after `encoder_layers` layers.
struct Autoencoder {
  nn::Network net;
  size_t encoder_layers = 0;
  std::vector<EpochLoss> history;

  nn::Network encoder() const { return net.prefix(encoder_layers); }
  Matrix encode(const Matrix& x) const;
  double reconstruction_mse(const Matrix& x) const;
};

// Architecture + its mirror image for the decoder; the final decoder layer
// is plain linear.
Autoencoder make_autoencoder(size_t input_dim, const std::vector<size_t>& dims,
                             bool batchnorm, double leakiness, bool bias,
                             uint64_t seed);

// Mean-squared-error reconstruction training (per-element MSE).
Autoencoder pretrain_autoencoder(const Matrix& data,
                                 const std::vector<nn::LayerSpec>& encoder_arch,
                                 const TrainingConfig& cfg, double lambda = 1e-6);

// Hypersphere center: per-dimension mean of the network outputs over the
// given rows (which must exclude labeled anomalies), in inference mode after
// one statistics-priming pass.
std::vector<double> init_center(nn::Network& net, const Matrix& data);

// A trained network-based detector. Hypersphere kinds score by distance to
// the center; the supervised classifier scores by sigmoid probability.
struct NetModel {
  MethodKind kind = MethodKind::OneClass;
  nn::Network net;
  std::vector<double> center;
  Hyper hp;
  double radius_sq = 0.0;
  std::vector<EpochLoss> history;

  std::vector<double> score(const Matrix& x) const;
};

NetModel train_model(const SemiSupervisedSplit& split,
                     const std::vector<nn::LayerSpec>& arch,
                     const TrainingConfig& cfg, MethodKind mode,
                     const Hyper& hp, const Autoencoder* pretrained = nullptr);

}  // namespace deepsad::models
