#pragma once

#include "core/matrix.hpp"

namespace deepsad::models {

struct EntropyEstimate {
  double nats = 0.0;
  bool degenerate = false;  // singular covariance; nats is -inf
};

// Gaussian upper bound on differential entropy from sample latents.
//   full covariance: 1/2 * log((2*pi*e)^d * det(Cov))
//   isotropic:       d/2 * (1 + log(2*pi*sigma^2)), sigma^2 = mean of the
//                    per-dimension variances
// Sample (co)variances use the n-1 denominator. A non-positive-definite
// covariance yields the degenerate flag and a -inf sentinel.
EntropyEstimate latent_entropy(const Matrix& latents, bool isotropic);

}  // namespace deepsad::models
