#include "baselines/hybrid.hpp"

namespace deepsad::baselines {

std::vector<double> HybridModel::score(const Matrix& x) const {
  Matrix codes = encoder.infer(x);
  if (const auto* kde = std::get_if<KdeModel>(&shallow))
    return kde_score(*kde, codes);
  return iforest_score(std::get<IsolationForest>(shallow), codes);
}

HybridModel hybrid_fit(const models::Autoencoder& ae, const ShallowSpec& spec,
                       const Matrix& train_data) {
  HybridModel model;
  model.encoder = ae.encoder();
  Matrix codes = model.encoder.infer(train_data);
  if (spec.use_kde) {
    model.shallow = kde_fit(codes, spec.bandwidth_grid, spec.folds, spec.seed);
  } else {
    model.shallow = iforest_fit(codes, spec.trees, spec.psi, spec.seed);
  }
  return model;
}

std::vector<double> hybrid_apply(const models::Autoencoder& ae,
                                 const ShallowSpec& spec,
                                 const Matrix& train_data,
                                 const Matrix& test_data) {
  return hybrid_fit(ae, spec, train_data).score(test_data);
}

}  // namespace deepsad::baselines
