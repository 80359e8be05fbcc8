#pragma once

#include <map>
#include <string>
#include <variant>

#include "baselines/hybrid.hpp"
#include "models/model.hpp"

namespace deepsad::models {

// Any trained artifact that can live in a model file: network detectors,
// pretrained autoencoders, shallow baselines and hybrids.
using AnyModel = std::variant<NetModel, Autoencoder, baselines::KdeModel,
                              baselines::IsolationForest,
                              baselines::HybridModel>;

std::string model_kind(const AnyModel& m);
size_t model_input_dim(const AnyModel& m);

// Anomaly scores, higher = more anomalous. Autoencoders are pretraining
// artifacts, not detectors, and refuse to score.
std::vector<double> score_model(const AnyModel& m, const Matrix& x);

// Shared envelope: magic, format version, kind tag, metadata map, payload.
void save_model(const AnyModel& m, const std::string& path,
                const std::map<std::string, std::string>& metadata = {});

struct LoadedModel {
  AnyModel model;
  std::map<std::string, std::string> metadata;
};

LoadedModel load_model(const std::string& path);

}  // namespace deepsad::models
