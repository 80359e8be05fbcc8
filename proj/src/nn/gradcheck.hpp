#pragma once

#include <functional>
#include <string>

#include "nn/network.hpp"

namespace deepsad::nn {

// Loss defined on network outputs. eval() returns the loss value and, when
// `grad` is non-null, fills dLoss/dOutputs. The harness adds the coupled
// weight-decay term lambda/2 * sum ||W||_F^2 over dense weights on both the
// analytic and the finite-difference side.
struct OutputLoss {
  virtual ~OutputLoss() = default;
  virtual double eval(const Matrix& outputs, Matrix* grad) const = 0;
  double lambda = 0.0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
};

// Central finite differences (L(t+e) - L(t-e)) / 2e against backward, per
// parameter. Relative error uses the finite-difference value as reference
// with a small floor so near-zero gradients do not amplify rounding noise.
GradCheckReport gradient_check(Network& net, const OutputLoss& loss,
                               const Matrix& batch, double fd_eps);

}  // namespace deepsad::nn
