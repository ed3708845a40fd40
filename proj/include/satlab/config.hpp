#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal structured-text config: `[section]` tables with `key = value`
// entries, `#` comments, nested table names via `[a.b]`. Values are strings;
// typed getters parse on demand with line-positioned errors.

namespace satlab {

struct ConfigError : std::runtime_error {
  int line = 0;
  std::string field;
  ConfigError(const std::string& msg, int line_no, std::string fld = {})
      : std::runtime_error(msg + (line_no > 0 ? " (line " +
                                                    std::to_string(line_no) +
                                                    ")"
                                              : "")),
        line(line_no),
        field(std::move(fld)) {}
};

class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;
  const std::map<std::string, std::string>* section(
      const std::string& name) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& dflt) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double dflt) const;
  long get_int(const std::string& section, const std::string& key) const;
  long get_int(const std::string& section, const std::string& key,
               long dflt) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool dflt) const;
  // comma-separated doubles
  std::vector<double> get_list(const std::string& section,
                               const std::string& key) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

 private:
  std::map<std::string, std::map<std::string, std::string>> tables_;
  std::map<std::string, int> key_lines_;
  const std::string& raw(const std::string& section,
                         const std::string& key) const;
  int line_of(const std::string& section, const std::string& key) const;
};

}  // namespace satlab
