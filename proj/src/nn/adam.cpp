#include "nn/adam.hpp"

#include <cmath>

namespace deepsad::nn {

AdamState AdamState::for_network(Network& net) {
  AdamState st;
  for (const auto& p : net.parameters()) {
    st.first_moment.emplace_back(p.data->size(), 0.0);
    st.second_moment.emplace_back(p.data->size(), 0.0);
  }
  return st;
}

void adam_step(std::vector<ParamView>& params, const Gradients& grads,
               AdamState& state, double lr, double weight_decay) {
  require(lr > 0.0, ErrorCode::InvalidArgument, "adam_step: lr must be positive");
  require(weight_decay >= 0.0, ErrorCode::InvalidArgument,
          "adam_step: weight decay must be non-negative");
  require(params.size() == grads.size() &&
              params.size() == state.first_moment.size(),
          ErrorCode::Shape, "adam_step: parameter/gradient count mismatch");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& theta = *params[pi].data;
    const auto& g = grads[pi];
    require(g.size() == theta.size(), ErrorCode::Shape,
            "adam_step: gradient shape mismatch for " + params[pi].name);
    auto& m = state.first_moment[pi];
    auto& v = state.second_moment[pi];
    const double lambda = params[pi].decay ? weight_decay : 0.0;
    for (size_t i = 0; i < theta.size(); ++i) {
      require(std::isfinite(g[i]), ErrorCode::Numeric,
              "adam_step: non-finite gradient in " + params[pi].name);
      const double ge = g[i] + lambda * theta[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * ge;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * ge * ge;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= lr * mhat / (std::sqrt(vhat) + state.numeric_eps);
    }
  }
}

}  // namespace deepsad::nn
