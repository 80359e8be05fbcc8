#include "models/entropy.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "core/error.hpp"

namespace deepsad::models {

namespace {

// log-determinant via Cholesky; returns false if the matrix is not positive
// definite. Pivots below a relative tolerance count as singular so that
// rank-deficient covariances hit the degenerate path despite rounding.
bool cholesky_logdet(std::vector<double>& a, size_t d, double* logdet) {
  double max_diag = 0.0;
  for (size_t j = 0; j < d; ++j)
    max_diag = std::max(max_diag, std::abs(a[j * d + j]));
  const double pivot_tol = std::max(max_diag, 1.0) * 1e-12;
  double acc = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (diag <= pivot_tol || !std::isfinite(diag)) return false;
    const double ljj = std::sqrt(diag);
    a[j * d + j] = ljj;
    acc += std::log(ljj);
    for (size_t i = j + 1; i < d; ++i) {
      double s = a[i * d + j];
      for (size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = s / ljj;
    }
  }
  *logdet = 2.0 * acc;
  return true;
}

}  // namespace

EntropyEstimate latent_entropy(const Matrix& latents, bool isotropic) {
  const size_t n = latents.rows(), d = latents.cols();
  require(d >= 1, ErrorCode::InvalidArgument, "latent_entropy: empty latents");
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<double> mean(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double* zi = latents.row(i);
    for (size_t j = 0; j < d; ++j) mean[j] += zi[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  if (isotropic) {
    require(n >= 2, ErrorCode::InvalidArgument,
            "latent_entropy: isotropic estimator needs >= 2 rows");
    double var_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double* zi = latents.row(i);
      for (size_t j = 0; j < d; ++j) {
        const double c = zi[j] - mean[j];
        var_sum += c * c;
      }
    }
    const double sigma_sq =
        var_sum / (static_cast<double>(d) * static_cast<double>(n - 1));
    if (sigma_sq <= 0.0)
      return {-std::numeric_limits<double>::infinity(), true};
    return {0.5 * static_cast<double>(d) * (1.0 + std::log(two_pi * sigma_sq)),
            false};
  }

  require(n >= d + 1, ErrorCode::InvalidArgument,
          "latent_entropy: full-covariance estimator needs >= d+1 rows");
  std::vector<double> cov(d * d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double* zi = latents.row(i);
    for (size_t j = 0; j < d; ++j) {
      const double cj = zi[j] - mean[j];
      for (size_t k = 0; k <= j; ++k)
        cov[j * d + k] += cj * (zi[k] - mean[k]);
    }
  }
  for (size_t j = 0; j < d; ++j)
    for (size_t k = 0; k <= j; ++k) {
      cov[j * d + k] /= static_cast<double>(n - 1);
      cov[k * d + j] = cov[j * d + k];
    }

  double logdet = 0.0;
  if (!cholesky_logdet(cov, d, &logdet))
    return {-std::numeric_limits<double>::infinity(), true};
  return {0.5 * (static_cast<double>(d) * std::log(two_pi * std::numbers::e) +
                 logdet),
          false};
}

}  // namespace deepsad::models
