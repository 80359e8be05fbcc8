#include "models/losses.hpp"

#include <algorithm>
#include <cmath>

namespace deepsad::models {

std::vector<double> squared_distances(const Matrix& outputs,
                                      std::span<const double> center) {
  require(outputs.cols() == center.size(), ErrorCode::Shape,
          "squared_distances: center dimension mismatch");
  std::vector<double> d2(outputs.rows());
  for (size_t i = 0; i < outputs.rows(); ++i) {
    const double* oi = outputs.row(i);
    double s = 0.0;
    for (size_t j = 0; j < center.size(); ++j) {
      const double c = oi[j] - center[j];
      s += c * c;
    }
    d2[i] = s;
  }
  return d2;
}

BatchLoss deep_sad_batch(const Matrix& outputs, std::span<const int> labels,
                         std::span<const double> center, double eta,
                         double inverse_eps) {
  require(outputs.rows() == labels.size(), ErrorCode::Shape,
          "deep_sad_batch: one label per output row required");
  require(outputs.rows() >= 1, ErrorCode::InvalidArgument,
          "deep_sad_batch: empty batch");
  require(eta > 0.0, ErrorCode::InvalidArgument, "deep_sad_batch: eta must be > 0");
  require(inverse_eps > 0.0, ErrorCode::InvalidArgument,
          "deep_sad_batch: inverse_eps must be > 0");

  const size_t b = outputs.rows(), d = outputs.cols();
  const double inv_b = 1.0 / static_cast<double>(b);
  BatchLoss out;
  out.output_grad = Matrix(b, d);
  double loss = 0.0;
  for (size_t i = 0; i < b; ++i) {
    const double* oi = outputs.row(i);
    double* gi = out.output_grad.row(i);
    double d2 = 0.0;
    for (size_t j = 0; j < d; ++j) {
      const double c = oi[j] - center[j];
      d2 += c * c;
    }
    double coeff;  // gradient is coeff * (o - c)
    switch (labels[i]) {
      case 0:
        loss += d2;
        coeff = 2.0 * inv_b;
        break;
      case 1:
        loss += eta * d2;
        coeff = 2.0 * eta * inv_b;
        break;
      case -1: {
        const double denom = d2 + inverse_eps;
        loss += eta / denom;
        coeff = -2.0 * eta * inv_b / (denom * denom);
        break;
      }
      default:
        fail(ErrorCode::InvalidArgument,
             "deep_sad_batch: labels must be 0, +1 or -1 (got " +
                 std::to_string(labels[i]) + ")");
    }
    for (size_t j = 0; j < d; ++j) gi[j] = coeff * (oi[j] - center[j]);
  }
  out.data_loss = loss * inv_b;
  return out;
}

BatchLoss one_class_batch(const Matrix& outputs, std::span<const double> center) {
  require(outputs.rows() >= 1, ErrorCode::InvalidArgument,
          "one_class_batch: empty batch");
  require(outputs.cols() == center.size(), ErrorCode::Shape,
          "one_class_batch: center dimension mismatch");
  const size_t b = outputs.rows(), d = outputs.cols();
  const double inv_b = 1.0 / static_cast<double>(b);
  BatchLoss out;
  out.output_grad = Matrix(b, d);
  double loss = 0.0;
  for (size_t i = 0; i < b; ++i) {
    const double* oi = outputs.row(i);
    double* gi = out.output_grad.row(i);
    double d2 = 0.0;
    for (size_t j = 0; j < d; ++j) {
      const double c = oi[j] - center[j];
      d2 += c * c;
      gi[j] = 2.0 * inv_b * c;
    }
    loss += d2;
  }
  out.data_loss = loss * inv_b;
  return out;
}

BatchLoss soft_boundary_batch(const Matrix& outputs,
                              std::span<const double> center, double radius_sq,
                              double nu) {
  require(nu > 0.0 && nu <= 1.0, ErrorCode::InvalidArgument,
          "soft_boundary_batch: nu must lie in (0,1]");
  require(radius_sq >= 0.0, ErrorCode::InvalidArgument,
          "soft_boundary_batch: R^2 must be non-negative");
  require(outputs.rows() >= 1, ErrorCode::InvalidArgument,
          "soft_boundary_batch: empty batch");
  const size_t b = outputs.rows(), d = outputs.cols();
  const double scale = 1.0 / (nu * static_cast<double>(b));
  BatchLoss out;
  out.output_grad = Matrix(b, d);
  double hinge = 0.0;
  for (size_t i = 0; i < b; ++i) {
    const double* oi = outputs.row(i);
    double* gi = out.output_grad.row(i);
    double d2 = 0.0;
    for (size_t j = 0; j < d; ++j) {
      const double c = oi[j] - center[j];
      d2 += c * c;
    }
    const double excess = d2 - radius_sq;
    const double coeff = excess > 0.0 ? 2.0 * scale : 0.0;
    if (excess > 0.0) hinge += excess;
    for (size_t j = 0; j < d; ++j) gi[j] = coeff * (oi[j] - center[j]);
  }
  out.data_loss = radius_sq + scale * hinge;
  return out;
}

BatchLoss bce_batch(const Matrix& logits, std::span<const int> targets) {
  require(logits.cols() == 1, ErrorCode::Shape,
          "bce_batch: expected a single logit column");
  require(logits.rows() == targets.size(), ErrorCode::Shape,
          "bce_batch: one target per row required");
  require(logits.rows() >= 1, ErrorCode::InvalidArgument, "bce_batch: empty batch");
  const size_t b = logits.rows();
  const double inv_b = 1.0 / static_cast<double>(b);
  BatchLoss out;
  out.output_grad = Matrix(b, 1);
  double loss = 0.0;
  for (size_t i = 0; i < b; ++i) {
    require(targets[i] == 0 || targets[i] == 1, ErrorCode::InvalidArgument,
            "bce_batch: targets must be 0 or 1");
    const double z = logits.at(i, 0);
    const double t = static_cast<double>(targets[i]);
    // stable form: max(z,0) - z*t + log(1 + exp(-|z|))
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    const double sig = 1.0 / (1.0 + std::exp(-z));
    out.output_grad.at(i, 0) = (sig - t) * inv_b;
  }
  out.data_loss = loss * inv_b;
  return out;
}

double update_radius(std::vector<double> distances_sq, double nu) {
  require(!distances_sq.empty(), ErrorCode::InvalidArgument,
          "update_radius: empty distance list");
  require(nu > 0.0 && nu <= 1.0, ErrorCode::InvalidArgument,
          "update_radius: nu must lie in (0,1]");
  const double n = static_cast<double>(distances_sq.size());
  const auto k = static_cast<long>(std::ceil((1.0 - nu) * n));
  if (k <= 0) return 0.0;
  std::nth_element(distances_sq.begin(), distances_sq.begin() + (k - 1),
                   distances_sq.end());
  return distances_sq[k - 1];
}

double weight_decay_term(const nn::Network& net, double lambda) {
  return 0.5 * lambda * net.dense_weight_frobenius_sq();
}

}  // namespace deepsad::models
