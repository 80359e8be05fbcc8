#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace deepsad::eval {

// One experiment outcome; serialized as a single key=value record line.
// `extra` carries method-specific fields (eta, nu, arch, ...).
struct EvalRecord {
  std::string method;
  std::string dataset;
  int normal_class = -1;  // -1 when the dataset has no class structure
  double gamma_l = 0.0;
  double gamma_p = 0.0;
  int k_l = 1;
  uint64_t seed = 0;
  double auc = 0.0;
  double wall_time = 0.0;
  std::map<std::string, std::string> extra;

  // cell identity: every field except auc and wall_time
  std::string cell_key() const;
  std::string line() const;
  static EvalRecord parse(const std::string& line);

  // field lookup by name for grouping ("method", "gamma_l", extra keys, ...)
  std::string field(const std::string& name) const;
};

std::vector<EvalRecord> load_records(const std::string& path);
void append_record(const std::string& path, const EvalRecord& rec);

struct SummaryRow {
  std::vector<std::string> group;  // values of the group_by fields, in order
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample std (n-1); 0 when count == 1
  size_t count = 0;
  bool single = false;  // count == 1, std reported as 0 by convention
};

// Per-group sample mean and sample standard deviation of the AUC, sorted by
// group key for deterministic output.
std::vector<SummaryRow> aggregate(const std::vector<EvalRecord>& records,
                                  const std::vector<std::string>& group_by);

std::string format_summary(const std::vector<SummaryRow>& rows,
                           const std::vector<std::string>& group_by);

}  // namespace deepsad::eval
