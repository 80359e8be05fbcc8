#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace deepsad::data {

// Tabular dataset. The reserved CSV column `label` carries anomaly labels
// (+1 normal, -1 anomaly) and `class` carries multi-class ids; every other
// column is a numeric feature. Row order is preserved.
struct Dataset {
  Matrix features;
  std::optional<std::vector<int>> class_labels;
  std::optional<std::vector<int>> anomaly_labels;

  size_t rows() const { return features.rows(); }
  size_t cols() const { return features.cols(); }
  Dataset take_rows(const std::vector<size_t>& idx) const;
  void validate() const;
};

Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

}  // namespace deepsad::data
