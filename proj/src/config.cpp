#include "satlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace satlab {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string current = "";
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("unterminated section header", line_no);
      }
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError("empty section name", line_no);
      cfg.tables_[current];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value", line_no);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    cfg.tables_[current][key] = value;
    cfg.key_lines_[current + "\n" + key] = line_no;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = tables_.find(section);
  return it != tables_.end() && it->second.count(key) > 0;
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, tbl] : tables_) out.push_back(name);
  return out;
}

const std::map<std::string, std::string>* Config::section(
    const std::string& name) const {
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : &it->second;
}

const std::string& Config::raw(const std::string& section,
                               const std::string& key) const {
  auto it = tables_.find(section);
  if (it == tables_.end() || !it->second.count(key)) {
    throw ConfigError("missing field '" + key + "' in section [" + section + "]",
                      0, key);
  }
  return it->second.at(key);
}

int Config::line_of(const std::string& section, const std::string& key) const {
  auto it = key_lines_.find(section + "\n" + key);
  return it == key_lines_.end() ? 0 : it->second;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key) const {
  return raw(section, key);
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& dflt) const {
  return has(section, key) ? raw(section, key) : dflt;
}

double Config::get_double(const std::string& section,
                          const std::string& key) const {
  const std::string& v = raw(section, key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "' is not a number: " + v,
                      line_of(section, key), key);
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double dflt) const {
  return has(section, key) ? get_double(section, key) : dflt;
}

long Config::get_int(const std::string& section, const std::string& key) const {
  const std::string& v = raw(section, key);
  try {
    std::size_t used = 0;
    long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "' is not an integer: " + v,
                      line_of(section, key), key);
  }
}

long Config::get_int(const std::string& section, const std::string& key,
                     long dflt) const {
  return has(section, key) ? get_int(section, key) : dflt;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool dflt) const {
  if (!has(section, key)) return dflt;
  std::string v = raw(section, key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("field '" + key + "' is not a boolean: " + v,
                    line_of(section, key), key);
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key) const {
  const std::string& v = raw(section, key);
  std::vector<double> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "' has a non-numeric entry: " + item,
                        line_of(section, key), key);
    }
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  tables_[section][key] = value;
}

}  // namespace satlab
