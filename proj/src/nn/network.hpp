#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nn/layers.hpp"

namespace deepsad::nn {

// Forward tape: caches per-layer intermediates plus the parameter version
// they were computed with, so backward can reject stale tapes.
struct Tape {
  std::vector<LayerTape> layers;
  size_t batch_rows = 0;
  uint64_t param_version = 0;
};

// Mutable view of one parameter tensor. `decay` marks tensors subject to
// the Frobenius weight-decay term (dense weight matrices only).
struct ParamView {
  std::string name;
  std::vector<double>* data;
  bool decay;
};

// One gradient buffer per parameter tensor, index-aligned with parameters().
using Gradients = std::vector<std::vector<double>>;

// Fixed sequential stack of Dense / LeakyRelu / BatchNorm layers.
class Network {
 public:
  Network() = default;
  static Network from_specs(const std::vector<LayerSpec>& specs);

  void init_glorot(Rng& rng);

  size_t input_dim() const { return input_dim_; }
  size_t output_dim() const { return output_dim_; }
  size_t layer_count() const { return layers_.size(); }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  const Layer& layer(size_t i) const { return layers_[i]; }
  Layer& layer(size_t i) { return layers_[i]; }
  uint64_t param_version() const { return param_version_; }
  void bump_version() { ++param_version_; }

  // Training-mode forward. Fills `tape` when given; updates batch-norm
  // running statistics only when `update_running` is set (gradient
  // verification re-evaluates the loss without the side effect).
  Matrix forward(const Matrix& batch, Mode mode, Tape* tape = nullptr,
                 bool update_running = true);

  // Inference-mode forward; pure, safe for concurrent use.
  Matrix infer(const Matrix& batch) const;

  // Gradients w.r.t. every parameter tensor given dLoss/dOutput.
  Gradients backward(const Tape& tape, const Matrix& grad_output) const;

  std::vector<ParamView> parameters();
  std::vector<const std::vector<double>*> parameter_values() const;
  size_t parameter_count() const;

  // sum over dense layers of ||W||_F^2 (the weight-decay term operates on these)
  double dense_weight_frobenius_sq() const;

  // Stack this network's layers after another's (autoencoder construction).
  void append(const Network& tail);
  // First `n` layers as a standalone network (encoder extraction).
  Network prefix(size_t n) const;

  void save(std::ostream& os) const;
  static Network load(std::istream& is);

 private:
  std::vector<LayerSpec> specs_;
  std::vector<Layer> layers_;
  size_t input_dim_ = 0, output_dim_ = 0;
  uint64_t param_version_ = 0;
};

// Architecture helpers ------------------------------------------------------

// Standard MLP stack: for each hidden size h, Dense(prev->h) [+BatchNorm]
// + LeakyRelu; final Dense(prev->dims.back()) is plain linear.
std::vector<LayerSpec> mlp_specs(size_t input_dim, const std::vector<size_t>& dims,
                                 bool batchnorm = true, double leakiness = 0.1,
                                 bool bias = false);

// Parse "32-16-8" into hidden/output sizes.
std::vector<size_t> parse_dims(const std::string& spec);

void validate_specs(const std::vector<LayerSpec>& specs);

}  // namespace deepsad::nn
