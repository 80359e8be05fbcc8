#pragma once

#include <cstdint>
#include <vector>

#include "nn/network.hpp"

namespace deepsad::nn {

// Adam with bias correction and coupled L2 weight decay: the effective
// gradient is grad + lambda * param for tensors flagged for decay, which is
// the exact gradient of the lambda/2 * ||W||_F^2 objective term.
struct AdamState {
  uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double numeric_eps = 1e-8;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  static AdamState for_network(Network& net);
};

void adam_step(std::vector<ParamView>& params, const Gradients& grads,
               AdamState& state, double lr, double weight_decay);

}  // namespace deepsad::nn
