#include "data/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace deepsad::data {

void Dataset::validate() const {
  if (class_labels)
    require(class_labels->size() == rows(), ErrorCode::Shape,
            "dataset: class label count does not match row count");
  if (anomaly_labels) {
    require(anomaly_labels->size() == rows(), ErrorCode::Shape,
            "dataset: anomaly label count does not match row count");
    for (int y : *anomaly_labels)
      require(y == 1 || y == -1, ErrorCode::InvalidArgument,
              "dataset: anomaly labels must be +1 or -1");
  }
}

Dataset Dataset::take_rows(const std::vector<size_t>& idx) const {
  Dataset out;
  out.features = features.take_rows(idx);
  if (class_labels) {
    out.class_labels.emplace();
    for (size_t i : idx) out.class_labels->push_back((*class_labels)[i]);
  }
  if (anomaly_labels) {
    out.anomaly_labels.emplace();
    for (size_t i : idx) out.anomaly_labels->push_back((*anomaly_labels)[i]);
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, size_t row, size_t col) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  require(ec == std::errc() && ptr == end, ErrorCode::Format,
          "csv: non-numeric cell at row " + std::to_string(row) + ", column " +
              std::to_string(col) + ": '" + cell + "'");
  return v;
}

int parse_int(const std::string& cell, size_t row, size_t col) {
  const double v = parse_double(cell, row, col);
  const int i = static_cast<int>(v);
  require(static_cast<double>(i) == v, ErrorCode::Format,
          "csv: expected integer at row " + std::to_string(row) + ", column " +
              std::to_string(col));
  return i;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open dataset file: " + path);

  std::string header;
  require(static_cast<bool>(std::getline(in, header)), ErrorCode::Format,
          "csv: missing header row in " + path);
  const auto names = split_line(header);
  require(!names.empty(), ErrorCode::Format, "csv: empty header in " + path);

  long label_col = -1, class_col = -1;
  std::vector<size_t> feature_cols;
  for (size_t c = 0; c < names.size(); ++c) {
    const std::string name = trim(names[c]);
    if (name == "label") {
      require(label_col < 0, ErrorCode::Format, "csv: duplicate label column");
      label_col = static_cast<long>(c);
    } else if (name == "class") {
      require(class_col < 0, ErrorCode::Format, "csv: duplicate class column");
      class_col = static_cast<long>(c);
    } else {
      feature_cols.push_back(c);
    }
  }
  require(!feature_cols.empty(), ErrorCode::Format,
          "csv: no feature columns in " + path);

  std::vector<double> values;
  std::vector<int> labels, classes;
  std::string line;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    require(cells.size() == names.size(), ErrorCode::Format,
            "csv: row " + std::to_string(row + 1) + " has " +
                std::to_string(cells.size()) + " cells, header has " +
                std::to_string(names.size()));
    for (size_t c : feature_cols)
      values.push_back(parse_double(cells[c], row + 1, c + 1));
    if (label_col >= 0) {
      const int y = parse_int(cells[label_col], row + 1, label_col + 1);
      require(y == 1 || y == -1, ErrorCode::Format,
              "csv: label must be +1 or -1 at row " + std::to_string(row + 1));
      labels.push_back(y);
    }
    if (class_col >= 0)
      classes.push_back(parse_int(cells[class_col], row + 1, class_col + 1));
    ++row;
  }

  Dataset ds;
  ds.features = Matrix(row, feature_cols.size());
  ds.features.values() = std::move(values);
  if (label_col >= 0) ds.anomaly_labels = std::move(labels);
  if (class_col >= 0) ds.class_labels = std::move(classes);
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write dataset file: " + path);

  for (size_t j = 0; j < ds.cols(); ++j) {
    if (j) out << ',';
    out << 'f' << j;
  }
  if (ds.class_labels) out << ",class";
  if (ds.anomaly_labels) out << ",label";
  out << '\n';

  char buf[32];
  for (size_t i = 0; i < ds.rows(); ++i) {
    const double* ri = ds.features.row(i);
    for (size_t j = 0; j < ds.cols(); ++j) {
      if (j) out << ',';
      // %.17g round-trips doubles exactly
      std::snprintf(buf, sizeof buf, "%.17g", ri[j]);
      out << buf;
    }
    if (ds.class_labels) out << ',' << (*ds.class_labels)[i];
    if (ds.anomaly_labels) out << ',' << (*ds.anomaly_labels)[i];
    out << '\n';
  }
  require(out.good(), ErrorCode::Io, "write failed: " + path);
}

}  // namespace deepsad::data
