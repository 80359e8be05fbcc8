#pragma once

#include <span>
#include <vector>

#include "core/matrix.hpp"
#include "nn/network.hpp"

namespace deepsad::models {

// Data term of a mini-batch objective plus its gradient w.r.t. the network
// outputs. The weight-decay term lambda/2 * sum ||W||_F^2 is additive and
// parameter-only; weight_decay_term() evaluates it and the optimizer applies
// its gradient through coupled L2.
struct BatchLoss {
  double data_loss = 0.0;
  Matrix output_grad;
};

// Semi-supervised hypersphere loss:
//   (1/B) [ sum_{y=0} d2 + eta * sum_{y=+1} d2 + eta * sum_{y=-1} 1/(d2 + eps) ]
// with d2 = ||output - c||^2. Labels: 0 unlabeled, +1 labeled normal,
// -1 labeled anomaly.
BatchLoss deep_sad_batch(const Matrix& outputs, std::span<const int> labels,
                         std::span<const double> center, double eta,
                         double inverse_eps);

// Unsupervised special case: mean squared distance to the center.
BatchLoss one_class_batch(const Matrix& outputs, std::span<const double> center);

// R^2 + (1/(nu*B)) * sum max(0, d2 - R^2); R^2 is held fixed in the gradient.
BatchLoss soft_boundary_batch(const Matrix& outputs,
                              std::span<const double> center, double radius_sq,
                              double nu);

// Binary cross-entropy on logits (one column). targets: 1 = anomaly.
BatchLoss bce_batch(const Matrix& logits, std::span<const int> targets);

// Optimal radius for the soft-boundary objective: the (1-nu)-quantile of the
// squared distances (smallest value with >= ceil((1-nu)*n) values <= it).
double update_radius(std::vector<double> distances_sq, double nu);

// lambda/2 * sum over dense layers of ||W||_F^2
double weight_decay_term(const nn::Network& net, double lambda);

std::vector<double> squared_distances(const Matrix& outputs,
                                      std::span<const double> center);

}  // namespace deepsad::models
