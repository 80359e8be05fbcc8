#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace deepsad::nn {

enum class LayerKind : uint8_t { Dense = 1, LeakyRelu = 2, BatchNorm = 3 };

// Declarative layer description; networks are built from ordered lists of
// these and model files store them verbatim.
struct LayerSpec {
  LayerKind kind;
  uint32_t fan_in = 0;   // Dense only
  uint32_t fan_out = 0;  // Dense: output dim; BatchNorm: feature dim
  bool use_bias = false;
  double leakiness = 0.1;    // LeakyRelu only
  double bn_momentum = 0.1;  // BatchNorm only

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class Mode { Training, Inference };

// Per-layer forward cache consumed by the backward pass.
struct LayerTape {
  Matrix input;                 // Dense, LeakyRelu
  Matrix normalized;            // BatchNorm: pre-scale normalized batch
  std::vector<double> inv_std;  // BatchNorm: 1/sqrt(var + eps)
};

struct DenseLayer {
  Matrix weights;  // fan_out x fan_in
  std::vector<double> bias;
  bool use_bias = false;

  size_t fan_in() const { return weights.cols(); }
  size_t fan_out() const { return weights.rows(); }
};

struct LeakyReluLayer {
  double leakiness = 0.1;
};

// Batch normalization with a learnable per-feature scale and no shift: a
// shift is a bias term, which hypersphere models must not contain.
// Variances are biased (divide by batch size); running statistics follow
// r <- (1 - momentum) * r + momentum * batch_stat.
struct BatchNormLayer {
  std::vector<double> scale;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  static constexpr double kEps = 1e-4;

  size_t dim() const { return scale.size(); }
};

using Layer = std::variant<DenseLayer, LeakyReluLayer, BatchNormLayer>;

// Uniform Glorot initialization: entries ~ U[-b, b], b = sqrt(6/(fan_in+fan_out)).
Matrix glorot_init(size_t fan_in, size_t fan_out, Rng& rng);

}  // namespace deepsad::nn
