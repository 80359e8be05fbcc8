#include "eval/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace deepsad::eval {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string EvalRecord::cell_key() const {
  std::ostringstream os;
  os << method << '|' << dataset << '|' << normal_class << '|'
     << fmt_double(gamma_l) << '|' << fmt_double(gamma_p) << '|' << k_l << '|'
     << seed;
  for (const auto& [k, v] : extra) os << '|' << k << '=' << v;
  return os.str();
}

std::string EvalRecord::line() const {
  std::ostringstream os;
  os << "method=" << method << " dataset=" << dataset
     << " normal_class=" << normal_class << " gamma_l=" << fmt_double(gamma_l)
     << " gamma_p=" << fmt_double(gamma_p) << " k_l=" << k_l
     << " seed=" << seed << " auc=" << fmt_double(auc);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", wall_time);
  os << " wall_time=" << buf;
  for (const auto& [k, v] : extra) os << ' ' << k << '=' << v;
  return os.str();
}

EvalRecord EvalRecord::parse(const std::string& line) {
  EvalRecord rec;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    require(eq != std::string::npos, ErrorCode::Format,
            "record: token without '=': " + tok);
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "method") rec.method = val;
      else if (key == "dataset") rec.dataset = val;
      else if (key == "normal_class") rec.normal_class = std::stoi(val);
      else if (key == "gamma_l") rec.gamma_l = std::stod(val);
      else if (key == "gamma_p") rec.gamma_p = std::stod(val);
      else if (key == "k_l") rec.k_l = std::stoi(val);
      else if (key == "seed") rec.seed = std::stoull(val);
      else if (key == "auc") rec.auc = std::stod(val);
      else if (key == "wall_time") rec.wall_time = std::stod(val);
      else rec.extra[key] = val;
    } catch (const std::exception&) {
      fail(ErrorCode::Format, "record: bad value for " + key + ": " + val);
    }
  }
  require(!rec.method.empty(), ErrorCode::Format,
          "record: missing method field");
  return rec;
}

std::string EvalRecord::field(const std::string& name) const {
  if (name == "method") return method;
  if (name == "dataset") return dataset;
  if (name == "normal_class") return std::to_string(normal_class);
  if (name == "gamma_l") return fmt_double(gamma_l);
  if (name == "gamma_p") return fmt_double(gamma_p);
  if (name == "k_l") return std::to_string(k_l);
  if (name == "seed") return std::to_string(seed);
  if (name == "auc") return fmt_double(auc);
  const auto it = extra.find(name);
  return it == extra.end() ? std::string{} : it->second;
}

std::vector<EvalRecord> load_records(const std::string& path) {
  std::vector<EvalRecord> out;
  std::ifstream in(path);
  if (!in.good()) return out;  // absent file = no records yet
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(EvalRecord::parse(line));
  }
  return out;
}

void append_record(const std::string& path, const EvalRecord& rec) {
  std::ofstream out(path, std::ios::app);
  require(out.good(), ErrorCode::Io, "cannot append to record file: " + path);
  out << rec.line() << '\n';
  require(out.good(), ErrorCode::Io, "write failed: " + path);
}

std::vector<SummaryRow> aggregate(const std::vector<EvalRecord>& records,
                                  const std::vector<std::string>& group_by) {
  require(!records.empty(), ErrorCode::InvalidArgument,
          "aggregate: no records");
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& rec : records) {
    std::vector<std::string> key;
    key.reserve(group_by.size());
    for (const auto& field : group_by) key.push_back(rec.field(field));
    groups[key].push_back(rec.auc);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, aucs] : groups) {
    SummaryRow row;
    row.group = key;
    row.count = aucs.size();
    double sum = 0.0;
    for (double a : aucs) sum += a;
    row.mean_auc = sum / static_cast<double>(aucs.size());
    if (aucs.size() >= 2) {
      double ss = 0.0;
      for (double a : aucs) {
        const double d = a - row.mean_auc;
        ss += d * d;
      }
      row.std_auc = std::sqrt(ss / static_cast<double>(aucs.size() - 1));
    } else {
      row.std_auc = 0.0;
      row.single = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;  // std::map iteration gives deterministic key order
}

std::string format_summary(const std::vector<SummaryRow>& rows,
                           const std::vector<std::string>& group_by) {
  std::ostringstream os;
  for (const auto& g : group_by) os << g << '\t';
  os << "mean_auc\tstd_auc\tcount\n";
  char buf[64];
  for (const auto& row : rows) {
    for (const auto& v : row.group) os << v << '\t';
    std::snprintf(buf, sizeof buf, "%.4f\t%.4f\t%zu", row.mean_auc,
                  row.std_auc, row.count);
    os << buf;
    if (row.single) os << "\tsingle";
    os << '\n';
  }
  return os.str();
}

}  // namespace deepsad::eval
