#include "exp/gridfile.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace deepsad::exp {

namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

SectionedConfig SectionedConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

SectionedConfig SectionedConfig::parse_text(const std::string& text,
                                            const std::string& origin) {
  SectionedConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorCode::Format,
              origin + ":" + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      require(!section.empty(), ErrorCode::Format,
              origin + ":" + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::Format,
            origin + ":" + std::to_string(lineno) + ": expected key = value");
    require(!section.empty(), ErrorCode::Format,
            origin + ":" + std::to_string(lineno) + ": key outside a section");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), ErrorCode::Format,
            origin + ":" + std::to_string(lineno) + ": empty key");
    std::vector<std::string> values;
    std::istringstream vs(line.substr(eq + 1));
    std::string tok;
    while (vs >> tok) values.push_back(tok);
    cfg.sections_[section][key] = std::move(values);
  }
  return cfg;
}

bool SectionedConfig::has(const std::string& section,
                          const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::vector<std::string> SectionedConfig::get_list(
    const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return {};
  const auto k = s->second.find(key);
  return k == s->second.end() ? std::vector<std::string>{} : k->second;
}

std::string SectionedConfig::get(const std::string& section,
                                 const std::string& key,
                                 const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  const auto values = get_list(section, key);
  require(values.size() == 1, ErrorCode::Format,
          "config: [" + section + "] " + key + " must hold a single value");
  return values[0];
}

double SectionedConfig::get_double(const std::string& section,
                                   const std::string& key,
                                   double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    fail(ErrorCode::Format,
         "config: [" + section + "] " + key + ": bad number '" + v + "'");
  }
}

long SectionedConfig::get_long(const std::string& section,
                               const std::string& key, long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  try {
    return std::stol(v);
  } catch (const std::exception&) {
    fail(ErrorCode::Format,
         "config: [" + section + "] " + key + ": bad integer '" + v + "'");
  }
}

bool SectionedConfig::get_bool(const std::string& section,
                               const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::Format,
       "config: [" + section + "] " + key + ": bad boolean '" + v + "'");
}

}  // namespace deepsad::exp
