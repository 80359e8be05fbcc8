#include "models/model_file.hpp"

#include <fstream>

#include "core/serial.hpp"

namespace deepsad::models {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'A', 'D', 'M', 'L', '0', '1'};
constexpr uint32_t kFormatVersion = 1;

MethodKind kind_from_name(const std::string& name) {
  for (MethodKind k :
       {MethodKind::DeepSad, MethodKind::OneClass, MethodKind::SoftBoundary,
        MethodKind::SupervisedBce, MethodKind::AutoencoderModel,
        MethodKind::Kde, MethodKind::Iforest, MethodKind::HybridKde,
        MethodKind::HybridIforest})
    if (method_kind_name(k) == name) return k;
  fail(ErrorCode::Format, "model file: unknown kind '" + name + "'");
}

void save_net_model(std::ostream& os, const NetModel& m) {
  m.net.save(os);
  write_f64_array(os, m.center);
  write_f64(os, m.hp.eta);
  write_f64(os, m.hp.lambda);
  write_f64(os, m.hp.inverse_eps);
  write_f64(os, m.hp.nu);
  write_f64(os, m.radius_sq);
}

NetModel load_net_model(std::istream& is, MethodKind kind) {
  NetModel m;
  m.kind = kind;
  m.net = nn::Network::load(is);
  m.center = read_f64_array(is);
  m.hp.eta = read_f64(is);
  m.hp.lambda = read_f64(is);
  m.hp.inverse_eps = read_f64(is);
  m.hp.nu = read_f64(is);
  m.radius_sq = read_f64(is);
  if (kind != MethodKind::SupervisedBce)
    require(m.center.size() == m.net.output_dim(), ErrorCode::Format,
            "model file: center dimension mismatch");
  return m;
}

void save_kde(std::ostream& os, const baselines::KdeModel& m) {
  write_f64(os, m.bandwidth);
  write_u64(os, m.training_points.rows());
  write_u64(os, m.training_points.cols());
  for (double x : m.training_points.values()) write_f64(os, x);
}

baselines::KdeModel load_kde(std::istream& is) {
  baselines::KdeModel m;
  m.bandwidth = read_f64(is);
  const uint64_t rows = read_u64(is);
  const uint64_t cols = read_u64(is);
  require(rows >= 1 && cols >= 1 && rows * cols <= (1ull << 32),
          ErrorCode::Format, "model file: implausible kde size");
  m.training_points = Matrix(rows, cols);
  for (double& x : m.training_points.values()) x = read_f64(is);
  require(m.bandwidth > 0.0, ErrorCode::Format,
          "model file: kde bandwidth must be positive");
  return m;
}

void save_iforest(std::ostream& os, const baselines::IsolationForest& f) {
  write_u32(os, f.subsample);
  write_u32(os, f.input_dim);
  write_u32(os, static_cast<uint32_t>(f.trees.size()));
  for (const auto& tree : f.trees) {
    write_u32(os, static_cast<uint32_t>(tree.nodes.size()));
    for (const auto& nd : tree.nodes) {
      write_u32(os, static_cast<uint32_t>(nd.feature));
      write_f64(os, nd.threshold);
      write_u32(os, static_cast<uint32_t>(nd.left));
      write_u32(os, static_cast<uint32_t>(nd.right));
      write_u32(os, nd.size);
    }
  }
}

baselines::IsolationForest load_iforest(std::istream& is) {
  baselines::IsolationForest f;
  f.subsample = read_u32(is);
  f.input_dim = read_u32(is);
  const uint32_t n_trees = read_u32(is);
  require(n_trees >= 1 && n_trees <= 100000, ErrorCode::Format,
          "model file: implausible tree count");
  f.trees.resize(n_trees);
  for (auto& tree : f.trees) {
    const uint32_t n_nodes = read_u32(is);
    require(n_nodes >= 1 && n_nodes <= (1u << 24), ErrorCode::Format,
            "model file: implausible node count");
    tree.nodes.resize(n_nodes);
    for (auto& nd : tree.nodes) {
      nd.feature = static_cast<int32_t>(read_u32(is));
      nd.threshold = read_f64(is);
      nd.left = static_cast<int32_t>(read_u32(is));
      nd.right = static_cast<int32_t>(read_u32(is));
      nd.size = read_u32(is);
    }
  }
  return f;
}

}  // namespace

std::string model_kind(const AnyModel& m) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NetModel>)
          return method_kind_name(v.kind);
        else if constexpr (std::is_same_v<T, Autoencoder>)
          return "autoencoder";
        else if constexpr (std::is_same_v<T, baselines::KdeModel>)
          return "kde";
        else if constexpr (std::is_same_v<T, baselines::IsolationForest>)
          return "iforest";
        else
          return v.is_kde() ? "hybrid-kde" : "hybrid-iforest";
      },
      m);
}

size_t model_input_dim(const AnyModel& m) {
  return std::visit(
      [](const auto& v) -> size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NetModel>)
          return v.net.input_dim();
        else if constexpr (std::is_same_v<T, Autoencoder>)
          return v.net.input_dim();
        else if constexpr (std::is_same_v<T, baselines::KdeModel>)
          return v.training_points.cols();
        else if constexpr (std::is_same_v<T, baselines::IsolationForest>)
          return v.input_dim;
        else
          return v.encoder.input_dim();
      },
      m);
}

std::vector<double> score_model(const AnyModel& m, const Matrix& x) {
  return std::visit(
      [&](const auto& v) -> std::vector<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NetModel>)
          return v.score(x);
        else if constexpr (std::is_same_v<T, Autoencoder>) {
          fail(ErrorCode::InvalidArgument,
               "an autoencoder is a pretraining artifact, not a detector");
        } else if constexpr (std::is_same_v<T, baselines::KdeModel>)
          return kde_score(v, x);
        else if constexpr (std::is_same_v<T, baselines::IsolationForest>)
          return iforest_score(v, x);
        else
          return v.score(x);
      },
      m);
}

void save_model(const AnyModel& m, const std::string& path,
                const std::map<std::string, std::string>& metadata) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::Io, "cannot write model file: " + path);
  os.write(kMagic, sizeof kMagic);
  write_u32(os, kFormatVersion);
  write_string(os, model_kind(m));
  write_u32(os, static_cast<uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    write_string(os, k);
    write_string(os, v);
  }
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NetModel>) {
          save_net_model(os, v);
        } else if constexpr (std::is_same_v<T, Autoencoder>) {
          v.net.save(os);
          write_u32(os, static_cast<uint32_t>(v.encoder_layers));
        } else if constexpr (std::is_same_v<T, baselines::KdeModel>) {
          save_kde(os, v);
        } else if constexpr (std::is_same_v<T, baselines::IsolationForest>) {
          save_iforest(os, v);
        } else {
          v.encoder.save(os);
          write_u8(os, v.is_kde() ? 1 : 0);
          if (v.is_kde())
            save_kde(os, std::get<baselines::KdeModel>(v.shallow));
          else
            save_iforest(os, std::get<baselines::IsolationForest>(v.shallow));
        }
      },
      m);
  require(os.good(), ErrorCode::Io, "write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::Io, "cannot open model file: " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  require(is.gcount() == sizeof magic &&
              std::equal(magic, magic + sizeof magic, kMagic),
          ErrorCode::Format, "not a model file: " + path);
  const uint32_t version = read_u32(is);
  require(version == kFormatVersion, ErrorCode::Format,
          "unsupported model file version " + std::to_string(version));
  const std::string kind_name = read_string(is);
  LoadedModel out;
  const uint32_t n_meta = read_u32(is);
  require(n_meta <= 1024, ErrorCode::Format, "model file: implausible metadata");
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_string(is);
    out.metadata[k] = read_string(is);
  }

  const MethodKind kind = kind_from_name(kind_name);
  switch (kind) {
    case MethodKind::DeepSad:
    case MethodKind::OneClass:
    case MethodKind::SoftBoundary:
    case MethodKind::SupervisedBce:
      out.model = load_net_model(is, kind);
      break;
    case MethodKind::AutoencoderModel: {
      Autoencoder ae;
      ae.net = nn::Network::load(is);
      ae.encoder_layers = read_u32(is);
      require(ae.encoder_layers >= 1 &&
                  ae.encoder_layers <= ae.net.layer_count(),
              ErrorCode::Format, "model file: bad encoder layer count");
      out.model = std::move(ae);
      break;
    }
    case MethodKind::Kde:
      out.model = load_kde(is);
      break;
    case MethodKind::Iforest:
      out.model = load_iforest(is);
      break;
    case MethodKind::HybridKde:
    case MethodKind::HybridIforest: {
      baselines::HybridModel h;
      h.encoder = nn::Network::load(is);
      const bool is_kde = read_u8(is) != 0;
      if (is_kde)
        h.shallow = load_kde(is);
      else
        h.shallow = load_iforest(is);
      out.model = std::move(h);
      break;
    }
  }
  return out;
}

}  // namespace deepsad::models
