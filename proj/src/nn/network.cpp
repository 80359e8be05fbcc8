#include "nn/network.hpp"

#include <cmath>
#include <sstream>

#include "core/serial.hpp"

namespace deepsad::nn {

Matrix glorot_init(size_t fan_in, size_t fan_out, Rng& rng) {
  require(fan_in >= 1 && fan_out >= 1, ErrorCode::InvalidArgument,
          "glorot_init: fan dimensions must be positive");
  const double b = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_out, fan_in);
  for (double& x : w.values()) x = rng.uniform(-b, b);
  return w;
}

void validate_specs(const std::vector<LayerSpec>& specs) {
  require(!specs.empty(), ErrorCode::InvalidArgument, "network: no layers");
  require(specs.front().kind == LayerKind::Dense, ErrorCode::InvalidArgument,
          "network: first layer must be dense");
  size_t dim = specs.front().fan_in;
  require(dim >= 1, ErrorCode::InvalidArgument, "network: zero input dim");
  for (const auto& s : specs) {
    switch (s.kind) {
      case LayerKind::Dense:
        require(s.fan_in == dim, ErrorCode::InvalidArgument,
                "network: dense fan_in does not match preceding layer");
        require(s.fan_out >= 1, ErrorCode::InvalidArgument,
                "network: dense fan_out must be positive");
        dim = s.fan_out;
        break;
      case LayerKind::LeakyRelu:
        require(s.leakiness > 0.0 && s.leakiness < 1.0,
                ErrorCode::InvalidArgument,
                "network: leakiness must lie in (0,1)");
        break;
      case LayerKind::BatchNorm:
        require(s.fan_out == dim, ErrorCode::InvalidArgument,
                "network: batch-norm dim does not match preceding layer");
        require(s.bn_momentum > 0.0 && s.bn_momentum <= 1.0,
                ErrorCode::InvalidArgument,
                "network: batch-norm momentum must lie in (0,1]");
        break;
    }
  }
}

Network Network::from_specs(const std::vector<LayerSpec>& specs) {
  validate_specs(specs);
  Network net;
  net.specs_ = specs;
  net.input_dim_ = specs.front().fan_in;
  size_t dim = net.input_dim_;
  for (const auto& s : specs) {
    switch (s.kind) {
      case LayerKind::Dense: {
        DenseLayer d;
        d.weights = Matrix(s.fan_out, s.fan_in);
        d.use_bias = s.use_bias;
        if (s.use_bias) d.bias.assign(s.fan_out, 0.0);
        net.layers_.emplace_back(std::move(d));
        dim = s.fan_out;
        break;
      }
      case LayerKind::LeakyRelu:
        net.layers_.emplace_back(LeakyReluLayer{s.leakiness});
        break;
      case LayerKind::BatchNorm: {
        BatchNormLayer bn;
        bn.scale.assign(dim, 1.0);
        bn.running_mean.assign(dim, 0.0);
        bn.running_var.assign(dim, 1.0);
        bn.momentum = s.bn_momentum;
        net.layers_.emplace_back(std::move(bn));
        break;
      }
    }
  }
  net.output_dim_ = dim;
  return net;
}

void Network::init_glorot(Rng& rng) {
  for (auto& layer : layers_) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      d->weights = glorot_init(d->weights.cols(), d->weights.rows(), rng);
      if (d->use_bias) std::fill(d->bias.begin(), d->bias.end(), 0.0);
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      std::fill(bn->scale.begin(), bn->scale.end(), 1.0);
      std::fill(bn->running_mean.begin(), bn->running_mean.end(), 0.0);
      std::fill(bn->running_var.begin(), bn->running_var.end(), 1.0);
    }
  }
  ++param_version_;
}

namespace {

Matrix dense_forward(const DenseLayer& d, const Matrix& x) {
  Matrix y = matmul_bt(x, d.weights);
  if (d.use_bias) {
    for (size_t i = 0; i < y.rows(); ++i) {
      double* yi = y.row(i);
      for (size_t j = 0; j < y.cols(); ++j) yi[j] += d.bias[j];
    }
  }
  return y;
}

Matrix leaky_forward(const LeakyReluLayer& l, const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values())
    if (v < 0.0) v *= l.leakiness;
  return y;
}

Matrix batchnorm_infer(const BatchNormLayer& bn, const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  const size_t d = bn.dim();
  std::vector<double> inv_std(d);
  for (size_t j = 0; j < d; ++j)
    inv_std[j] = 1.0 / std::sqrt(bn.running_var[j] + BatchNormLayer::kEps);
  for (size_t i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i);
    double* yi = y.row(i);
    for (size_t j = 0; j < d; ++j)
      yi[j] = bn.scale[j] * (xi[j] - bn.running_mean[j]) * inv_std[j];
  }
  return y;
}

Matrix batchnorm_train(BatchNormLayer& bn, const Matrix& x, LayerTape* cache,
                       bool update_running) {
  require(x.rows() >= 2, ErrorCode::InvalidArgument,
          "batch norm requires batch size >= 2 in training mode");
  const size_t b = x.rows(), d = bn.dim();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (size_t i = 0; i < b; ++i) {
    const double* xi = x.row(i);
    for (size_t j = 0; j < d; ++j) mean[j] += xi[j];
  }
  for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(b);
  for (size_t i = 0; i < b; ++i) {
    const double* xi = x.row(i);
    for (size_t j = 0; j < d; ++j) {
      const double c = xi[j] - mean[j];
      var[j] += c * c;
    }
  }
  for (size_t j = 0; j < d; ++j) var[j] /= static_cast<double>(b);

  std::vector<double> inv_std(d);
  for (size_t j = 0; j < d; ++j)
    inv_std[j] = 1.0 / std::sqrt(var[j] + BatchNormLayer::kEps);

  Matrix normalized(b, d);
  Matrix y(b, d);
  for (size_t i = 0; i < b; ++i) {
    const double* xi = x.row(i);
    double* ni = normalized.row(i);
    double* yi = y.row(i);
    for (size_t j = 0; j < d; ++j) {
      ni[j] = (xi[j] - mean[j]) * inv_std[j];
      yi[j] = bn.scale[j] * ni[j];
    }
  }
  if (update_running) {
    for (size_t j = 0; j < d; ++j) {
      bn.running_mean[j] =
          (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * mean[j];
      bn.running_var[j] =
          (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * var[j];
    }
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

}  // namespace

Matrix Network::forward(const Matrix& batch, Mode mode, Tape* tape,
                        bool update_running) {
  if (mode == Mode::Inference) {
    require(tape == nullptr, ErrorCode::InvalidArgument,
            "forward: tape is only produced in training mode");
    return infer(batch);
  }
  require(!batch.empty(), ErrorCode::InvalidArgument, "forward: empty batch");
  require(batch.cols() == input_dim_, ErrorCode::Shape,
          "forward: batch has " + std::to_string(batch.cols()) +
              " columns, network expects " + std::to_string(input_dim_));
  if (tape) {
    tape->layers.assign(layers_.size(), LayerTape{});
    tape->batch_rows = batch.rows();
    tape->param_version = param_version_;
  }
  Matrix x = batch;
  for (size_t li = 0; li < layers_.size(); ++li) {
    LayerTape* cache = tape ? &tape->layers[li] : nullptr;
    if (auto* d = std::get_if<DenseLayer>(&layers_[li])) {
      if (cache) cache->input = x;
      x = dense_forward(*d, x);
    } else if (auto* l = std::get_if<LeakyReluLayer>(&layers_[li])) {
      if (cache) cache->input = x;
      x = leaky_forward(*l, x);
    } else {
      auto& bn = std::get<BatchNormLayer>(layers_[li]);
      x = batchnorm_train(bn, x, cache, update_running);
    }
  }
  return x;
}

Matrix Network::infer(const Matrix& batch) const {
  require(!batch.empty(), ErrorCode::InvalidArgument, "infer: empty batch");
  require(batch.cols() == input_dim_, ErrorCode::Shape,
          "infer: batch has " + std::to_string(batch.cols()) +
              " columns, network expects " + std::to_string(input_dim_));
  Matrix x = batch;
  for (const auto& layer : layers_) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      x = dense_forward(*d, x);
    } else if (const auto* l = std::get_if<LeakyReluLayer>(&layer)) {
      x = leaky_forward(*l, x);
    } else {
      x = batchnorm_infer(std::get<BatchNormLayer>(layer), x);
    }
  }
  return x;
}

Gradients Network::backward(const Tape& tape, const Matrix& grad_output) const {
  require(tape.param_version == param_version_, ErrorCode::State,
          "backward: stale tape (parameters changed since forward)");
  require(tape.layers.size() == layers_.size(), ErrorCode::State,
          "backward: tape does not match this network");
  require(grad_output.rows() == tape.batch_rows &&
              grad_output.cols() == output_dim_,
          ErrorCode::Shape, "backward: grad_output shape mismatch");

  Gradients grads(parameter_count());
  size_t slot = parameter_count();
  Matrix g = grad_output;
  const double inv_b = 1.0 / static_cast<double>(tape.batch_rows);

  for (size_t li = layers_.size(); li-- > 0;) {
    const LayerTape& cache = tape.layers[li];
    if (const auto* d = std::get_if<DenseLayer>(&layers_[li])) {
      if (d->use_bias) {
        std::vector<double> db(d->fan_out(), 0.0);
        for (size_t i = 0; i < g.rows(); ++i) {
          const double* gi = g.row(i);
          for (size_t j = 0; j < g.cols(); ++j) db[j] += gi[j];
        }
        grads[--slot] = std::move(db);
      }
      Matrix dw = matmul_at(g, cache.input);
      grads[--slot] = std::move(dw.values());
      g = matmul(g, d->weights);
    } else if (const auto* l = std::get_if<LeakyReluLayer>(&layers_[li])) {
      // derivative at exactly 0 is the leakiness (tie-break, measure zero)
      for (size_t i = 0; i < g.size(); ++i) {
        if (cache.input.values()[i] <= 0.0) g.values()[i] *= l->leakiness;
      }
    } else {
      const auto& bn = std::get<BatchNormLayer>(layers_[li]);
      const size_t b = g.rows(), ddim = bn.dim();
      std::vector<double> dscale(ddim, 0.0);
      std::vector<double> mean_gx(ddim, 0.0), mean_gn(ddim, 0.0);
      // g is dL/dy with y = scale * normalized; reduce to per-feature sums
      for (size_t i = 0; i < b; ++i) {
        const double* gi = g.row(i);
        const double* ni = cache.normalized.row(i);
        for (size_t j = 0; j < ddim; ++j) {
          dscale[j] += gi[j] * ni[j];
          mean_gx[j] += gi[j];
          mean_gn[j] += gi[j] * ni[j];
        }
      }
      for (size_t j = 0; j < ddim; ++j) {
        mean_gx[j] *= inv_b;
        mean_gn[j] *= inv_b;
      }
      Matrix dx(b, ddim);
      for (size_t i = 0; i < b; ++i) {
        const double* gi = g.row(i);
        const double* ni = cache.normalized.row(i);
        double* di = dx.row(i);
        for (size_t j = 0; j < ddim; ++j) {
          di[j] = bn.scale[j] * cache.inv_std[j] *
                  (gi[j] - mean_gx[j] - ni[j] * mean_gn[j]);
        }
      }
      grads[--slot] = std::move(dscale);
      g = std::move(dx);
    }
  }
  require(slot == 0, ErrorCode::Internal, "backward: parameter slot mismatch");
  return grads;
}

std::vector<ParamView> Network::parameters() {
  std::vector<ParamView> out;
  for (size_t li = 0; li < layers_.size(); ++li) {
    const std::string base = "layer" + std::to_string(li);
    if (auto* d = std::get_if<DenseLayer>(&layers_[li])) {
      out.push_back({base + ".weights", &d->weights.values(), true});
      if (d->use_bias) out.push_back({base + ".bias", &d->bias, false});
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layers_[li])) {
      out.push_back({base + ".bn_scale", &bn->scale, false});
    }
  }
  return out;
}

std::vector<const std::vector<double>*> Network::parameter_values() const {
  std::vector<const std::vector<double>*> out;
  for (const auto& layer : layers_) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      out.push_back(&d->weights.values());
      if (d->use_bias) out.push_back(&d->bias);
    } else if (const auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      out.push_back(&bn->scale);
    }
  }
  return out;
}

size_t Network::parameter_count() const {
  size_t n = 0;
  for (const auto& layer : layers_) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      n += d->use_bias ? 2 : 1;
    } else if (std::holds_alternative<BatchNormLayer>(layer)) {
      n += 1;
    }
  }
  return n;
}

double Network::dense_weight_frobenius_sq() const {
  double s = 0.0;
  for (const auto& layer : layers_)
    if (const auto* d = std::get_if<DenseLayer>(&layer))
      s += d->weights.frobenius_sq();
  return s;
}

void Network::append(const Network& tail) {
  require(output_dim_ == tail.input_dim_, ErrorCode::Shape,
          "append: dimension mismatch between networks");
  for (const auto& s : tail.specs_) specs_.push_back(s);
  for (const auto& l : tail.layers_) layers_.push_back(l);
  output_dim_ = tail.output_dim_;
  ++param_version_;
}

Network Network::prefix(size_t n) const {
  require(n >= 1 && n <= layers_.size(), ErrorCode::InvalidArgument,
          "prefix: layer count out of range");
  std::vector<LayerSpec> specs(specs_.begin(), specs_.begin() + n);
  Network net = from_specs(specs);
  for (size_t i = 0; i < n; ++i) net.layers_[i] = layers_[i];
  return net;
}

// Model-file layout: magic+version, layer specs, then parameter values in
// declared order (dense: weights row-major then bias; batch norm: scale,
// running mean, running variance), 64-bit little-endian throughout.
void Network::save(std::ostream& os) const {
  write_u32(os, static_cast<uint32_t>(specs_.size()));
  for (const auto& s : specs_) {
    write_u8(os, static_cast<uint8_t>(s.kind));
    write_u32(os, s.fan_in);
    write_u32(os, s.fan_out);
    write_u8(os, s.use_bias ? 1 : 0);
    write_f64(os, s.leakiness);
    write_f64(os, s.bn_momentum);
  }
  for (const auto& layer : layers_) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      write_f64_array(os, d->weights.values());
      if (d->use_bias) write_f64_array(os, d->bias);
    } else if (const auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      write_f64_array(os, bn->scale);
      write_f64_array(os, bn->running_mean);
      write_f64_array(os, bn->running_var);
    }
  }
}

Network Network::load(std::istream& is) {
  const uint32_t n = read_u32(is);
  require(n >= 1 && n <= 4096, ErrorCode::Format,
          "model file: implausible layer count");
  std::vector<LayerSpec> specs(n);
  for (auto& s : specs) {
    s.kind = static_cast<LayerKind>(read_u8(is));
    require(s.kind == LayerKind::Dense || s.kind == LayerKind::LeakyRelu ||
                s.kind == LayerKind::BatchNorm,
            ErrorCode::Format, "model file: unknown layer kind");
    s.fan_in = read_u32(is);
    s.fan_out = read_u32(is);
    s.use_bias = read_u8(is) != 0;
    s.leakiness = read_f64(is);
    s.bn_momentum = read_f64(is);
  }
  Network net = from_specs(specs);
  for (auto& layer : net.layers_) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      auto w = read_f64_array(is);
      require(w.size() == d->weights.size(), ErrorCode::Format,
              "model file: weight size mismatch");
      d->weights.values() = std::move(w);
      if (d->use_bias) {
        auto b = read_f64_array(is);
        require(b.size() == d->bias.size(), ErrorCode::Format,
                "model file: bias size mismatch");
        d->bias = std::move(b);
      }
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      auto sc = read_f64_array(is);
      auto rm = read_f64_array(is);
      auto rv = read_f64_array(is);
      require(sc.size() == bn->scale.size() && rm.size() == sc.size() &&
                  rv.size() == sc.size(),
              ErrorCode::Format, "model file: batch-norm size mismatch");
      bn->scale = std::move(sc);
      bn->running_mean = std::move(rm);
      bn->running_var = std::move(rv);
    }
  }
  return net;
}

std::vector<size_t> parse_dims(const std::string& spec) {
  std::vector<size_t> dims;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    require(!tok.empty(), ErrorCode::InvalidArgument,
            "architecture spec: empty size in '" + spec + "'");
    size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument,
           "architecture spec: bad size '" + tok + "'");
    }
    require(pos == tok.size() && v >= 1, ErrorCode::InvalidArgument,
            "architecture spec: bad size '" + tok + "'");
    dims.push_back(v);
  }
  require(!dims.empty(), ErrorCode::InvalidArgument,
          "architecture spec: no sizes in '" + spec + "'");
  return dims;
}

std::vector<LayerSpec> mlp_specs(size_t input_dim, const std::vector<size_t>& dims,
                                 bool batchnorm, double leakiness, bool bias) {
  require(!dims.empty(), ErrorCode::InvalidArgument, "mlp_specs: no layer sizes");
  std::vector<LayerSpec> specs;
  size_t prev = input_dim;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    specs.push_back({LayerKind::Dense, static_cast<uint32_t>(prev),
                     static_cast<uint32_t>(dims[i]), bias, 0.1, 0.1});
    if (batchnorm)
      specs.push_back({LayerKind::BatchNorm, 0, static_cast<uint32_t>(dims[i]),
                       false, 0.1, 0.1});
    specs.push_back({LayerKind::LeakyRelu, 0, 0, false, leakiness, 0.1});
    prev = dims[i];
  }
  specs.push_back({LayerKind::Dense, static_cast<uint32_t>(prev),
                   static_cast<uint32_t>(dims.back()), bias, 0.1, 0.1});
  return specs;
}

}  // namespace deepsad::nn
