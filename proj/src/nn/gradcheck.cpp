#include "nn/gradcheck.hpp"

#include <cmath>

namespace deepsad::nn {

namespace {

double total_loss(Network& net, const OutputLoss& loss, const Matrix& batch) {
  Matrix out = net.forward(batch, Mode::Training, nullptr,
                           /*update_running=*/false);
  double l = loss.eval(out, nullptr);
  if (loss.lambda != 0.0)
    l += 0.5 * loss.lambda * net.dense_weight_frobenius_sq();
  require(std::isfinite(l), ErrorCode::Numeric,
          "gradient_check: loss is not finite");
  return l;
}

}  // namespace

GradCheckReport gradient_check(Network& net, const OutputLoss& loss,
                               const Matrix& batch, double fd_eps) {
  require(fd_eps > 0.0, ErrorCode::InvalidArgument,
          "gradient_check: fd_eps must be positive");

  Tape tape;
  Matrix out = net.forward(batch, Mode::Training, &tape,
                           /*update_running=*/false);
  Matrix grad_out(out.rows(), out.cols());
  const double base = loss.eval(out, &grad_out);
  require(std::isfinite(base), ErrorCode::Numeric,
          "gradient_check: loss is not finite");
  Gradients analytic = net.backward(tape, grad_out);

  auto params = net.parameters();
  if (loss.lambda != 0.0) {
    for (size_t pi = 0; pi < params.size(); ++pi) {
      if (!params[pi].decay) continue;
      const auto& theta = *params[pi].data;
      for (size_t i = 0; i < theta.size(); ++i)
        analytic[pi][i] += loss.lambda * theta[i];
    }
  }

  GradCheckReport report;
  // floor keeps rounding noise in the difference quotient from dominating
  // components whose true gradient is ~0
  const double denom_floor = 1e-5;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& theta = *params[pi].data;
    for (size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + fd_eps;
      const double lp = total_loss(net, loss, batch);
      theta[i] = saved - fd_eps;
      const double lm = total_loss(net, loss, batch);
      theta[i] = saved;
      const double fd = (lp - lm) / (2.0 * fd_eps);
      const double rel =
          std::abs(analytic[pi][i] - fd) / std::max(std::abs(fd), denom_floor);
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param =
            params[pi].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

}  // namespace deepsad::nn
