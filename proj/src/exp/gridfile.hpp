#pragma once

#include <map>
#include <string>
#include <vector>

namespace deepsad::exp {

// Line-oriented key-value config with [sections]; values are whitespace
// separated lists. '#' starts a comment.
class SectionedConfig {
 public:
  static SectionedConfig parse_file(const std::string& path);
  static SectionedConfig parse_text(const std::string& text,
                                    const std::string& origin = "<text>");

  bool has(const std::string& section, const std::string& key) const;
  // single-value accessors (error when the key lists several values)
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<std::string> get_list(const std::string& section,
                                    const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::vector<std::string>>>&
  sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::vector<std::string>>>
      sections_;
};

}  // namespace deepsad::exp
