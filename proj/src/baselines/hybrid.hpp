#pragma once

#include <variant>

#include "baselines/iforest.hpp"
#include "baselines/kde.hpp"
#include "models/model.hpp"

namespace deepsad::baselines {

// Shallow detector fit on autoencoder bottleneck codes. The stored encoder
// maps inputs to codes at scoring time.
struct HybridModel {
  nn::Network encoder;
  std::variant<KdeModel, IsolationForest> shallow;

  bool is_kde() const { return std::holds_alternative<KdeModel>(shallow); }
  std::vector<double> score(const Matrix& x) const;
};

struct ShallowSpec {
  bool use_kde = true;
  // KDE
  std::vector<double> bandwidth_grid = default_bandwidth_grid();
  int folds = 5;
  // Isolation Forest
  int trees = 100;
  int psi = 256;
  uint64_t seed = 1;
};

HybridModel hybrid_fit(const models::Autoencoder& ae, const ShallowSpec& spec,
                       const Matrix& train_data);

// Encode train and test through the autoencoder (inference mode), fit the
// shallow method on the train codes, score the test codes.
std::vector<double> hybrid_apply(const models::Autoencoder& ae,
                                 const ShallowSpec& spec,
                                 const Matrix& train_data,
                                 const Matrix& test_data);

}  // namespace deepsad::baselines
